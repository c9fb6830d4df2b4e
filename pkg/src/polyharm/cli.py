"""polyharm command line.

Usage:
    polyharm spectrum --d 2 --m 1 --t 1 --count 3
    polyharm bounds --d 1 --m 2
    polyharm bounds --d 2 --m-range 6..14
    polyharm verify --suite sandwich --d 2 --m-range 1..5
    polyharm oracle --geometry radial --d 2 --m 2 --t 2 --ell 0 --basis 14 --count 1

Exit codes: 0 ok, 1 a regression check failed, 2 bad flags,
3 precision budget exceeded, 4 Galerkin discretization ill-conditioned.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings

from . import __version__, bounds, galerkin, verify
from .ball_secular import ProblemSpec, ScanConfig, SuspectedDoubleRootWarning, assemble_spectrum
from .errors import ConditioningError, DomainError, PrecisionRangeError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RANGE, EXIT_COND = 0, 1, 2, 3, 4

# plain values above 2^53 are reported in log form only
PLAIN_LIMIT = 2.0 ** 53


def fmt_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: fmt_number(v) for k, v in r.items()})
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    """Inverse of to_csv: numbers come back as int/float, the rest as str."""
    out = []
    for r in csv.DictReader(io.StringIO(text)):
        out.append({k: _parse_cell(v) for k, v in r.items()})
    return out


def _parse_cell(v: str):
    if v in ("true", "false"):
        return v == "true"
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def _json_value(x) -> str:
    if isinstance(x, dict):
        return "{" + ", ".join(f"{_json_str(k)}: {_json_value(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in x) + "]"
    if x is None:
        return "null"
    if isinstance(x, float) and not math.isfinite(x):
        return _json_str(fmt_number(x))
    if isinstance(x, (bool, int, float)):
        return fmt_number(x)
    return _json_str(str(x))


def _json_str(s: str) -> str:
    import json

    return json.dumps(s, ensure_ascii=False)


def to_json(command: str, parameters: dict, rows: list[dict], warns: list[str]) -> str:
    doc = {"command": command, "parameters": parameters, "rows": rows, "warnings": list(warns)}
    return _json_value(doc) + "\n"


def emit(args, command: str, rows: list[dict], warns: list[str]) -> None:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "jobs", "format", "command", "parser")}
    params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()}
    text = to_json(command, params, rows, warns) if args.format == "json" else to_csv(rows)
    if args.format == "csv" and warns:
        for w in warns:
            print(f"warning: {w}", file=sys.stderr)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _range(s: str) -> tuple[int, int]:
    try:
        a, b = s.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {s!r}")
    if lo > hi or lo < 1:
        raise argparse.ArgumentTypeError(f"empty or invalid range {s!r}")
    return lo, hi


def _dims(s: str) -> tuple[int, ...]:
    try:
        ds = tuple(int(x) for x in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated dimensions, got {s!r}")
    if not ds or any(d < 1 for d in ds):
        raise argparse.ArgumentTypeError("dimensions must be >= 1")
    return ds


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _sides(s: str) -> tuple[str, ...]:
    parts = tuple(p.strip() for p in s.split(","))
    try:
        if any(float(p) <= 0 for p in parts):
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(f"sides must be positive numbers, got {s!r}")
    return parts


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(args) -> int:
    if not (1 <= args.t <= args.m):
        args.parser.error("need 1 <= t <= m")
    cfg = ScanConfig()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SuspectedDoubleRootWarning)
        entries = assemble_spectrum(ProblemSpec(args.d, args.m, args.t), args.count, cfg,
                                    ell_max=args.ell_max, rho_max=args.rho_max)
    rows = []
    for e in entries:
        for j in range(e.multiplicity):
            if e.ordinal + j > args.count:
                break
            rows.append({"ordinal": e.ordinal + j, "lambda": e.lam, "rho": e.rho, "ell": e.ell,
                         "multiplicity": e.multiplicity})
    warns = sorted({str(w.message) for w in caught})
    emit(args, "spectrum", rows, warns)
    return EXIT_OK


def _plain(v: bounds.LogValue):
    return v.value() if v.ln_mag < math.log(PLAIN_LIMIT) else "overflow"


def cmd_bounds(args) -> int:
    if args.m is None and args.m_range is None:
        args.parser.error("one of --m or --m-range is required")
    ms = [args.m] if args.m is not None else list(range(args.m_range[0], args.m_range[1] + 1))
    rows, warns = [], []
    for m in ms:
        if not (0 <= args.h < m):
            args.parser.error(f"need 0 <= h < m (h={args.h}, m={m})")
        rep = bounds.bounds_report(m, args.d, args.h)
        t = m - args.h
        row = {
            "d": args.d, "m": m, "h": args.h, "t": t,
            "ln_lower": rep.lower.ln_mag, "ln_upper": rep.upper.ln_mag,
            "lower": _plain(rep.lower), "upper": _plain(rep.upper),
            "normalized_lower": rep.normalized_lower, "normalized_upper": rep.normalized_upper,
            "two_term": rep.asymptotic_two_term if m >= 2 else "n/a",
        }
        if args.h == 0:
            nav = bounds.navier_reference(m, args.d)
            row["ln_navier"] = nav.ln_mag
            row["navier"] = _plain(nav)
        else:
            row["ln_navier"] = "n/a"
            row["navier"] = "n/a"
        rows.append(row)
    if any(r["lower"] == "overflow" or r["upper"] == "overflow" for r in rows):
        warns.append("plain columns above 2^53 are marked overflow; use the ln_ columns")
    emit(args, "bounds", rows, warns)
    return EXIT_OK


def cmd_verify(args) -> int:
    params = verify.SuiteParams(
        d=args.d if args.d is not None else verify.SuiteParams.d,
        m=args.m, t=args.t, m_range=args.m_range, count=args.count,
    )
    result = verify.run_suite(args.suite, params, jobs=args.jobs)
    rows = []
    for r in result.reports:
        rows.append({
            "check_id": r.check_id,
            "params": ";".join(f"{k}={v}" for k, v in sorted(r.params.items())),
            "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin, "verdict": r.verdict,
            "tol": r.tol, "exploratory": r.exploratory, "note": r.note,
        })
    emit(args, "verify", rows, result.warnings)
    if result.regression_failures:
        print(f"{len(result.regression_failures)} regression check(s) failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_oracle(args) -> int:
    if not (1 <= args.t <= args.m):
        args.parser.error("need 1 <= t <= m")
    kw = {}
    if args.geometry == "box":
        if not args.sides:
            args.parser.error("--sides is required for the box geometry")
        kw["sides"] = args.sides
    elif args.geometry == "radial":
        kw["d"] = args.d or 2
        kw["ell"] = args.ell
    cur = galerkin.ritz_values(galerkin.GalerkinBasis(args.geometry, args.m, args.basis, **kw), args.t, args.count)
    prev = []
    if args.basis > 2:
        prev = galerkin.ritz_values(galerkin.GalerkinBasis(args.geometry, args.m, args.basis - 2, **kw), args.t, args.count)
    rows = []
    for i, v in enumerate(cur, start=1):
        p = prev[i - 1] if i <= len(prev) else math.nan
        rows.append({"index": i, "value": v, "value_at_n_minus_2": p, "change": p - v})
    emit(args, "oracle", rows, [])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyharm", description="Dirichlet polyharmonic eigenvalues on balls and boxes")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.set_defaults(parser=p)

    p = sub.add_parser("spectrum", help="ball eigenvalues from the secular equation")
    p.add_argument("--d", type=_positive, required=True)
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--t", type=_positive, required=True)
    p.add_argument("--count", type=_positive, required=True)
    p.add_argument("--ell-max", type=int, default=None)
    p.add_argument("--rho-max", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("bounds", help="closed-form bounds for the ball fundamental tone")
    p.add_argument("--d", type=_positive, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--m", type=_positive)
    g.add_argument("--m-range", type=_range)
    p.add_argument("--h", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run an inequality verification suite")
    p.add_argument("--suite", choices=verify.SUITES, required=True)
    p.add_argument("--d", type=_dims, default=None)
    p.add_argument("--m", type=_positive, default=None)
    p.add_argument("--t", type=_positive, default=None)
    p.add_argument("--m-range", type=_range, default=None)
    p.add_argument("--count", type=_positive, default=None)
    p.add_argument("--jobs", type=_positive, default=1, help="worker processes (output does not depend on it)")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="Galerkin Ritz values")
    p.add_argument("--geometry", choices=("interval", "box", "radial"), required=True)
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--t", type=_positive, required=True)
    p.add_argument("--basis", type=_positive, required=True)
    p.add_argument("--count", type=_positive, default=1)
    p.add_argument("--d", type=_positive, default=None)
    p.add_argument("--ell", type=int, default=0)
    p.add_argument("--sides", type=_sides, default=None)
    common(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PrecisionRangeError as exc:
        print(f"error: {exc} (precision budget: |z| <= 55 for the Bessel series)", file=sys.stderr)
        return EXIT_RANGE
    except ConditioningError as exc:
        print(f"error: {exc}; try a smaller --basis", file=sys.stderr)
        return EXIT_COND
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
