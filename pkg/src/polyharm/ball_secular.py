"""Ball eigenvalues of (-Delta)^m u = lambda (-Delta)^(m-t) u with Dirichlet data.

Separating variables gives, for each angular degree ell, a t x t secular
matrix L(t, ell+m-t) whose determinant vanishes exactly at rho = lambda^(1/2t).
The scan works with a rescaled copy of L: row i and column j are divided by
the positive factors pref_{k+i} * rho^(k+2i), which leaves the sign of the
projected determinant unchanged but removes the underflow near rho = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from . import specfun
from .errors import ConsistencyError, ConvergenceError, DomainError, PrecisionRangeError


class SuspectedDoubleRootWarning(UserWarning):
    """|det| dips towards zero between scan points without a sign change."""


@dataclass(frozen=True)
class ProblemSpec:
    d: int
    m: int
    t: int

    def __post_init__(self):
        if self.d < 1 or self.m < 1 or not (1 <= self.t <= self.m):
            raise DomainError(f"need d>=1 and 1<=t<=m, got (d,m,t)=({self.d},{self.m},{self.t})")

    def admissible(self, ell: int) -> bool:
        return ell >= 0 and (self.d > 1 or ell <= 1)


@dataclass(frozen=True)
class ScanConfig:
    rho_max: float = 20.0
    step: float = 0.05
    root_tol: float = 1e-13
    phase_tol: float = 1e-7
    max_roots_per_ell: int = 1000
    rho_floor: float = 1e-3
    refine_levels: int = 6

    def __post_init__(self):
        if not (0 < self.step <= 0.1):
            raise DomainError("scan step must lie in (0, 0.1]")
        if self.root_tol > 1e-10:
            raise DomainError("root_tol must be <= 1e-10")
        if self.rho_max > specfun.Z_MAX:
            raise PrecisionRangeError(
                f"rho_max = {self.rho_max} exceeds the Bessel series budget Z_MAX = {specfun.Z_MAX}"
            )


@dataclass(frozen=True)
class SecularSample:
    rho: float
    det: complex
    projected: float


@dataclass(frozen=True)
class SpectrumEntry:
    lam: float
    rho: float
    ell: int
    multiplicity: int
    ordinal: int


def gamma_points(rho: float, t: int) -> np.ndarray:
    if rho <= 0:
        raise DomainError("rho must be positive")
    theta = np.arange(t) * math.pi / t
    return rho * np.exp(1j * theta)


def build_L(t: int, k: int, d: int, rho: float) -> np.ndarray:
    """The t x t matrix with entries (-g_j)^(i-1) * jtilde(k+i-1, d, g_j)."""
    g = gamma_points(rho, t)
    L = np.empty((t, t), dtype=np.complex128)
    for i in range(t):
        L[i] = (-g) ** i * specfun.jtilde(k + i, d, g)
    return L


def complex_det(M) -> complex:
    """Determinant by LU with partial pivoting; batched over leading axes."""
    M = np.asarray(M, dtype=np.complex128)
    single = M.ndim == 2
    if single:
        M = M[None]
    n = M.shape[-1]
    if n == 1:
        out = M[:, 0, 0].copy()
    elif n == 2:
        out = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    else:
        A = M.copy()
        out = np.ones(A.shape[0], dtype=np.complex128)
        rows = np.arange(A.shape[0])
        for c in range(n):
            piv = c + np.argmax(np.abs(A[:, c:, c]), axis=1)
            swap = piv != c
            if np.any(swap):
                tmp = A[rows, c].copy()
                A[rows, c] = A[rows, piv]
                A[rows, piv] = tmp
                out = np.where(swap, -out, out)
            p = A[:, c, c]
            out = out * p
            safe = np.where(p == 0, 1.0, p)
            f = A[:, c + 1:, c] / safe[:, None]
            A[:, c + 1:, c + 1:] -= f[:, :, None] * A[:, c, None, c + 1:]
    return complex(out[0]) if single else out


def _scaled_L_batch(t: int, k: int, d: int, rho: np.ndarray) -> np.ndarray:
    """Rescaled secular matrices for a batch of rho (shape (N, t, t))."""
    u = np.exp(1j * np.arange(t) * math.pi / t)
    g = rho[:, None] * u[None, :]
    out = np.empty((rho.size, t, t), dtype=np.complex128)
    for i in range(t):
        out[:, i, :] = (-1) ** i * u[None, :] ** (k + 2 * i) * specfun.jtilde_series(k + i, d, g)
    return out


def scaled_det(spec: ProblemSpec, ell: int, rho) -> np.ndarray:
    """det L(t, ell+m-t) divided by a positive rho-dependent factor."""
    return _det_and_scale(spec, ell, rho)[0]


def _det_and_scale(spec: ProblemSpec, ell: int, rho):
    # returns the rescaled determinant and the Hadamard bound of its matrix
    rho = np.atleast_1d(np.asarray(rho, dtype=np.float64))
    M = _scaled_L_batch(spec.t, ell + spec.m - spec.t, spec.d, rho)
    return complex_det(M), np.prod(np.linalg.norm(M, axis=2), axis=1)


class Secular:
    """Phase-projected secular function F(rho) for one (spec, ell)."""

    def __init__(self, spec: ProblemSpec, ell: int, cfg: ScanConfig):
        if not spec.admissible(ell):
            raise DomainError(f"ell={ell} is not admissible for d={spec.d}")
        self.spec, self.ell, self.cfg = spec, ell, cfg
        # reference ray from the first healthy point (near rho_floor the
        # rescaled matrix tends to a nonsingular Vandermonde-type matrix)
        det0 = scaled_det(spec, ell, [cfg.rho_floor])[0]
        if not np.isfinite(det0) or det0 == 0:
            raise ConsistencyError("secular determinant degenerate at rho_floor")
        self.u0 = det0 / abs(det0)

    def values(self, rho) -> tuple[np.ndarray, np.ndarray]:
        rho = np.atleast_1d(np.asarray(rho, dtype=np.float64))
        det, scale = _det_and_scale(self.spec, self.ell, rho)
        proj = det * np.conj(self.u0)
        # collinearity: rounding in the entries bounds the off-ray part
        bad = np.abs(proj.imag) > self.cfg.phase_tol * np.abs(det) + 1e-9 * scale
        if np.any(bad):
            j = int(np.argmax(bad))
            raise ConsistencyError(
                f"determinant left its ray at rho={rho[j]:.6g} "
                f"(|Im|/|det| = {abs(proj.imag[j]) / abs(det[j]):.3g}); Bessel precision breach"
            )
        return proj.real, np.abs(det)

    def samples(self, rho) -> list[SecularSample]:
        rho = np.atleast_1d(np.asarray(rho, dtype=np.float64))
        det = scaled_det(self.spec, self.ell, rho)
        f, _ = self.values(rho)
        return [SecularSample(float(r), complex(z), float(v)) for r, z, v in zip(rho, det, f)]

    def __call__(self, rho: float) -> tuple[float, float]:
        f, a = self.values([rho])
        return float(f[0]), float(a[0])


def secular(spec: ProblemSpec, ell: int, cfg: ScanConfig) -> Callable[[float], tuple[float, float]]:
    return Secular(spec, ell, cfg)


def _polish(F: Secular, a: np.ndarray, b: np.ndarray, fa: np.ndarray, fb: np.ndarray, tol: float) -> np.ndarray:
    """Bracketed Illinois iteration on all brackets at once.

    Each iteration costs one batched evaluation; a bisection step is forced
    whenever a bracket fails to shrink by half over two iterations.
    """
    a, b, fa, fb = a.copy(), b.copy(), fa.copy(), fb.copy()
    side = np.zeros(a.size, dtype=int)
    width_prev = b - a
    for it in range(200):
        active = (b - a) > tol * np.maximum(np.abs(a), np.abs(b))
        active &= (fa != 0) & (fb != 0)
        if not np.any(active):
            break
        x = (a * fb - b * fa) / (fb - fa)
        if it % 3 == 2:
            slow = (b - a) > 0.5 * width_prev
            x = np.where(slow, 0.5 * (a + b), x)
            width_prev = b - a
        bad = ~np.isfinite(x) | (x <= a) | (x >= b)
        x = np.where(bad, 0.5 * (a + b), x)
        idx = np.nonzero(active)[0]
        fx = np.zeros_like(a)
        fx[idx], _ = F.values(x[idx])
        left = active & (np.sign(fx) == np.sign(fa))
        right = active & ~left
        # Illinois: halve the retained endpoint value on repeated sides
        b_new = np.where(right, x, b)
        fb_new = np.where(right, fx, np.where(left & (side == 1), fb * 0.5, fb))
        a_new = np.where(left, x, a)
        fa_new = np.where(left, fx, np.where(right & (side == -1), fa * 0.5, fa))
        side = np.where(left, 1, np.where(right, -1, side))
        a, b, fa, fb = a_new, b_new, fa_new, fb_new
    else:
        raise ConvergenceError("root polishing did not converge")
    root = np.where(fa == 0, a, np.where(fb == 0, b, (a * fb - b * fa) / np.where(fb != fa, fb - fa, 1.0)))
    root = np.where((root < a) | (root > b) | ~np.isfinite(root), 0.5 * (a + b), root)
    return root


def _brackets(rho: np.ndarray, f: np.ndarray):
    s = np.sign(f)
    return np.nonzero(s[:-1] * s[1:] < 0)[0]


def _dips(rho: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Interior samples where a parabola through three neighbours crosses zero
    although the samples themselves do not change sign."""
    out = []
    for i in range(1, f.size - 1):
        f0, f1, f2 = f[i - 1], f[i], f[i + 1]
        if not (np.sign(f0) == np.sign(f1) == np.sign(f2)) or f1 == 0:
            continue
        if abs(f1) >= min(abs(f0), abs(f2)):
            continue
        c2 = 0.5 * (f0 - 2 * f1 + f2)
        c1 = 0.5 * (f2 - f0)
        if c2 == 0:
            continue
        vertex = f1 - c1 * c1 / (4 * c2)
        if np.sign(vertex) != np.sign(f1) or abs(vertex) < 1e-3 * abs(f1):
            out.append(i)
    return np.array(out, dtype=int)


@dataclass
class EllScan:
    roots: list[float]
    suspected: list[float] = field(default_factory=list)


def scan_ell(spec: ProblemSpec, ell: int, cfg: ScanConfig) -> EllScan:
    """All sign-change roots rho in (rho_floor, rho_max] for one degree ell."""
    F = Secular(spec, ell, cfg)
    n = int(math.ceil((cfg.rho_max - cfg.rho_floor) / cfg.step))
    rho = np.linspace(cfg.rho_floor, cfg.rho_max, n + 1)
    f, _ = F.values(rho)
    lo_list, hi_list, flo, fhi = [], [], [], []
    exact = []
    for i in np.nonzero(f == 0)[0]:
        exact.append(float(rho[i]))
        f[i] = 0.0
    for i in _brackets(rho, f):
        lo_list.append(rho[i]); hi_list.append(rho[i + 1]); flo.append(f[i]); fhi.append(f[i + 1])
    suspected = []
    for i in _dips(rho, f):
        a, b = rho[i - 1], rho[i + 1]
        found = False
        for level in range(1, cfg.refine_levels + 1):
            sub = np.linspace(a, b, 2 * 2 ** level + 1)
            fs, _ = F.values(sub)
            idx = _brackets(sub, fs)
            if idx.size:
                for j in idx:
                    lo_list.append(sub[j]); hi_list.append(sub[j + 1]); flo.append(fs[j]); fhi.append(fs[j + 1])
                found = True
                break
        if not found:
            suspected.append(float(rho[i]))
    roots = list(exact)
    if lo_list:
        roots += list(_polish(F, np.array(lo_list), np.array(hi_list), np.array(flo), np.array(fhi), cfg.root_tol))
    roots = sorted(set(float(r) for r in roots))
    if suspected:
        warnings.warn(
            f"(d,m,t)=({spec.d},{spec.m},{spec.t}) ell={ell}: suspected double roots near rho="
            + ", ".join(f"{r:.6g}" for r in suspected),
            SuspectedDoubleRootWarning,
            stacklevel=2,
        )
    return EllScan(roots[: cfg.max_roots_per_ell], suspected)


def eigenvalues_for_ell(spec: ProblemSpec, ell: int, cfg: ScanConfig) -> list[float]:
    return [r ** (2 * spec.t) for r in scan_ell(spec, ell, cfg).roots]


def spherical_multiplicity(d: int, ell: int) -> int:
    if d < 1 or ell < 0:
        raise DomainError("need d >= 1 and ell >= 0")
    if d == 1:
        return 1 if ell <= 1 else 0
    if d == 2:
        return 1 if ell == 0 else 2
    return (2 * ell + d - 2) * math.factorial(ell + d - 3) // (math.factorial(ell) * math.factorial(d - 2))


def _initial_rho_max(spec: ProblemSpec, K: int) -> float:
    # Weyl-law radius for ordinal K plus the Bessel upper bound for the first tone
    d = spec.d
    omega = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    weyl = 2 * math.pi * (K / omega ** 2) ** (1 / d)
    kappa = max(spec.m + d / 2 - 2, -1.0)
    first = specfun.bessel_j_zero(kappa, 1)
    return min(specfun.Z_MAX, max(1.3 * weyl, first) + 2.0 * math.pi)


def assemble_spectrum(
    spec: ProblemSpec,
    K: int,
    cfg: ScanConfig | None = None,
    ell_max: int | None = None,
    rho_max: float | None = None,
) -> list[SpectrumEntry]:
    """First K ordinals of the ball spectrum, merged over angular degrees."""
    if K < 1:
        raise DomainError("K must be >= 1")
    base = cfg or ScanConfig()
    auto = rho_max is None
    r_max = rho_max if rho_max is not None else _initial_rho_max(spec, K)
    cache: dict[int, list[float]] = {}
    while True:
        c = ScanConfig(
            rho_max=r_max, step=base.step, root_tol=base.root_tol, phase_tol=base.phase_tol,
            max_roots_per_ell=base.max_roots_per_ell, rho_floor=base.rho_floor,
            refine_levels=base.refine_levels,
        )
        cache.clear()
        result = _sweep(spec, K, c, ell_max, cache)
        if result is not None:
            return result
        if not auto or r_max >= specfun.Z_MAX:
            raise PrecisionRangeError(
                f"fewer than K={K} eigenvalues below rho_max={r_max:.4g}; "
                f"the Bessel series budget caps rho at Z_MAX={specfun.Z_MAX}"
            )
        r_max = min(specfun.Z_MAX, 1.25 * r_max)


def _sweep(spec, K, cfg, ell_max, cache):
    found: list[tuple[float, int, int]] = []  # (rho, ell, multiplicity)
    beyond = 0
    ell = 0
    while True:
        if not spec.admissible(ell) or (ell_max is not None and ell > ell_max):
            break
        mult = spherical_multiplicity(spec.d, ell)
        roots = scan_ell(spec, ell, cfg).roots
        cache[ell] = roots
        found.extend((r, ell, mult) for r in roots)
        rho_k = _kth_rho(found, K)
        if roots and (rho_k is None or roots[0] <= rho_k):
            beyond = 0
        else:
            beyond += 1
        if beyond >= 3:
            break
        ell += 1
    rho_k = _kth_rho(found, K)
    if rho_k is None:
        return None
    found.sort(key=lambda e: (e[0], e[1]))
    out = []
    ordinal = 1
    for r, l, mu in found:
        if ordinal > K:
            break
        out.append(SpectrumEntry(r ** (2 * spec.t), r, l, mu, ordinal))
        ordinal += mu
    return out


def _kth_rho(found, K):
    total = 0
    for r, _, mu in sorted(found, key=lambda e: (e[0], e[1])):
        total += mu
        if total >= K:
            return r
    return None


def expand_ordinals(entries: list[SpectrumEntry], K: int | None = None) -> list[float]:
    """Eigenvalues repeated by multiplicity: the sequence lambda_1 <= lambda_2 <= ..."""
    out = []
    for e in entries:
        out.extend([e.lam] * e.multiplicity)
    return out if K is None else out[:K]


# ---------------------------------------------------------------------------
# Exact algebra behind the determinant factorization


@lru_cache(maxsize=None)
def alpha_coeff(p: int, i: int, k: int) -> int:
    if p < 1 or i < -1 or i >= p or k < 0:
        raise DomainError(f"alpha({p},{i},{k}) outside -1 <= i < p, p >= 1, k >= 0")
    if i == -1:
        return 0
    if p == 1:
        return k
    q = p - 1
    if i == q:
        return alpha_coeff(q, q - 1, k) + q + k
    return alpha_coeff(q, i - 1, k) - (2 * q + k - i) * alpha_coeff(q, i, k)


def _falling(x: int, n: int) -> int:
    out = 1
    for q in range(n):
        out *= x - q
    return out


def build_B(n: int, ell: int) -> list[list[int]]:
    return [[_falling(ell + 2 * j, i) for j in range(n)] for i in range(n)]


def _bareiss_det(M: list[list[int]]) -> int:
    n = len(M)
    if n == 0:
        return 1
    A = [row[:] for row in M]
    sign, prev = 1, 1
    for c in range(n - 1):
        if A[c][c] == 0:
            swap = next((r for r in range(c + 1, n) if A[r][c] != 0), None)
            if swap is None:
                return 0
            A[c], A[swap] = A[swap], A[c]
            sign = -sign
        for r in range(c + 1, n):
            for j in range(c + 1, n):
                A[r][j] = (A[r][j] * A[c][c] - A[r][c] * A[c][j]) // prev
        prev = A[c][c]
    return sign * A[n - 1][n - 1]


def det_B_closed(n: int) -> int:
    out = 1
    for q in range(n):
        out *= math.factorial(q) * 2 ** q
    return out


def det_B_check(n: int, ell: int) -> tuple[int, int]:
    return _bareiss_det(build_B(n, ell)), det_B_closed(n)


def reduction_identity_i(m: int, k: int, j: int) -> tuple[int, int]:
    x = k + 2 * (j - 1)
    rhs = sum(alpha_coeff(m, i - 1, k) * _falling(x, i - 1) for i in range(1, m + 1))
    return _falling(x, m), rhs


def reduction_identity_ii(m: int, k: int) -> tuple[int, int]:
    x = k + 2 * m
    rhs = math.factorial(m) * 2 ** m + sum(alpha_coeff(m, i - 1, k) * _falling(x, i - 1) for i in range(1, m + 1))
    return _falling(x, m), rhs


def reduction_identity_iii(m: int, k: int, d: int, z) -> float:
    """Relative residual of the derivative identity for jtilde.

    ``z`` may be a scalar or an array of points; the worst residual is returned.
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    lhs = z ** m * specfun.jtilde_deriv(k, d, m, z)
    rhs = (-z) ** m * specfun.jtilde(k + m, d, z)
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    for i in range(1, m + 1):
        term = alpha_coeff(m, i - 1, k) * z ** (i - 1) * specfun.jtilde_deriv(k, d, i - 1, z)
        rhs = rhs + term
        scale = np.maximum(scale, np.abs(term))
    return float(np.max(np.abs(lhs - rhs) / scale))


def build_A(spec: ProblemSpec, ell: int, rho: float) -> np.ndarray:
    m, t = spec.m, spec.t
    g = gamma_points(rho, t)
    A = np.empty((m, m), dtype=np.complex128)
    for i in range(m):
        for j in range(m - t):
            A[i, j] = _falling(ell + 2 * j, i)
        A[i, m - t:] = g ** i * specfun.jtilde_deriv(ell, spec.d, i, g)
    return A


def det_A_factor_check(spec: ProblemSpec, ell: int, rho: float) -> float:
    m, t = spec.m, spec.t
    lhs = complex_det(build_A(spec, ell, rho))
    g = gamma_points(rho, t)
    rhs = (
        (-1) ** (t * (m - t))
        * det_B_closed(m - t)
        * complex_det(build_L(t, ell + m - t, spec.d, rho))
        * np.prod(g ** (m - t))
    )
    den = max(abs(lhs), abs(rhs))
    return 0.0 if den == 0 else float(abs(lhs - rhs) / den)
