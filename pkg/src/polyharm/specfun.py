"""Special functions: Gamma, double factorials, Bessel J and its zeros, and the
entire radial kernel ``jtilde``.

Bessel functions are evaluated from the ascending series only.  The series is
summed in double-double arithmetic (see :mod:`polyharm.dd`), which absorbs the
cancellation of roughly ``|z| log10(e)`` digits for arguments up to
:data:`Z_MAX`; beyond that a :class:`PrecisionRangeError` is raised.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .dd import ExtComplex, ExtReal, horner
from .errors import ConvergenceError, DomainError, PrecisionRangeError

Z_MAX = 55.0

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LN_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_ln_gamma(x: float) -> float:
    # valid for x >= 0.5
    x -= 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    return _HALF_LN_2PI + (x + 0.5) * math.log(t) - t + math.log(acc)


def ln_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"ln_gamma requires a finite positive argument, got {x}")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - _lanczos_ln_gamma(1.0 - x)
    return _lanczos_ln_gamma(x)


def gamma_sign_ln(x: float) -> tuple[int, float]:
    """Return (sign, ln|Gamma(x)|) for any real x; sign is 0 at the poles."""
    x = float(x)
    if x > 0.0:
        return 1, ln_gamma(x)
    if x == math.floor(x):
        return 0, math.inf
    # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    s = math.sin(math.pi * x)
    sign = 1 if s > 0 else -1
    return sign, math.log(math.pi / abs(s)) - ln_gamma(1.0 - x)


def rgamma(x: float) -> float:
    """1/Gamma(x), zero at the poles."""
    sign, lg = gamma_sign_ln(x)
    return 0.0 if sign == 0 else sign * math.exp(-lg)


def stirling_ln_gamma(z: float, h: float = 0.0) -> float:
    """Leading Stirling form (z+h-1/2) ln z - z + ln(2 pi)/2 for ln Gamma(z+h).

    Truncation error is O(1/z); only meant for the asymptotic regime z >= 2.
    """
    if z < 2.0:
        raise DomainError(f"stirling_ln_gamma is asymptotic; needs z >= 2, got {z}")
    return (z + h - 0.5) * math.log(z) - z + _HALF_LN_2PI


def double_factorial(n: int) -> int:
    if n < -1:
        raise DomainError(f"double factorial undefined for n={n}")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def pochhammer(a, k: int):
    """Rising factorial (a)_k, exact for int/Fraction input."""
    out = 1 if isinstance(a, (int, Fraction)) else 1.0
    for j in range(k):
        out *= a + j
    return out


# ---------------------------------------------------------------------------
# Ascending series in double-double
#
# Every Bessel-type value here is  pref * z**e * S(z**2)  with
#   S(v) = sum_k q_k v^(k-k0),  q_k = (-1)^k (p+2k)_falling(i) / (4^k k! (a)_k)
# p is the leading power (ell for jtilde), i the derivative order.  Coefficients
# are exact rationals, pre-multiplied by s^k with s a power of two chosen from
# the largest |z|^2 in the batch so neither q_k nor v^k leaves float range.


class _SeriesTable:
    def __init__(self, a: Fraction, p: int, i: int):
        self.a, self.p, self.i = a, p, i
        self.k0 = max(0, -((p - i) // 2)) if i > p else 0
        self.coeffs: list[Fraction] = []
        self.log_abs: list[float] = []
        self._c = Fraction(1)
        self._k = 0

    def _extend(self, n: int) -> None:
        while len(self.coeffs) < n:
            k = self._k
            if k > 0:
                self._c = self._c / (-4 * k * (self.a + k - 1))
            self._k += 1
            if k < self.k0:
                continue
            q = self._c * _falling(self.p + 2 * k, self.i)
            self.coeffs.append(q)
            self.log_abs.append(_log_abs_fraction(q))

    def n_terms(self, log_v: float) -> int:
        """Number of terms so the tail is below e^-82 of the largest term."""
        self._extend(8)
        j = 0
        best = -math.inf
        while True:
            self._extend(j + 1)
            la = self.log_abs[j]
            if la == -math.inf:
                j += 1
                continue
            term = la + j * log_v
            best = max(best, term)
            if j > 4 and term < best - 82.0 and term < self._next_bound(j, log_v):
                return j + 1
            j += 1
            if j > 2000:
                raise ConvergenceError("ascending series did not terminate")

    def _next_bound(self, j, log_v):
        # terms past j shrink once the ratio |v|/(4k(a+k)) < 1
        k = j + self.k0
        ratio = log_v - math.log(4.0 * (k + 1) * abs(float(self.a) + k) + 1e-300)
        return math.inf if ratio < 0 else -math.inf

    @lru_cache(maxsize=256)
    def for_exponent(self, sexp: int) -> ExtReal:
        # enough terms for any |v| < 2^(sexp+1)
        return self.scaled(self.n_terms((sexp + 1) * math.log(2.0)), sexp)

    @lru_cache(maxsize=256)
    def scaled(self, n: int, sexp: int) -> ExtReal:
        self._extend(n)
        scale = Fraction(2) ** (sexp) if sexp >= 0 else Fraction(1, 2 ** (-sexp))
        out = []
        f = Fraction(1)
        for q in self.coeffs[:n]:
            out.append(q * f)
            f *= scale
        return ExtReal.from_fractions(out)


def _falling(x: int, i: int) -> int:
    out = 1
    for j in range(i):
        out *= x - j
    return out


def _log_abs_fraction(q: Fraction) -> float:
    if q == 0:
        return -math.inf
    return math.log(abs(q.numerator)) - math.log(q.denominator)


@lru_cache(maxsize=None)
def _table(a: Fraction, p: int, i: int) -> _SeriesTable:
    return _SeriesTable(a, p, i)


def _series_sum(table: _SeriesTable, z: np.ndarray) -> np.ndarray:
    """S(z^2) for a batch of complex z, summed in double-double."""
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    if zmax > Z_MAX:
        raise PrecisionRangeError(
            f"|z| = {zmax:.6g} exceeds the series range Z_MAX = {Z_MAX}; "
            f"expected relative accuracy would fall below ~{_digits_at(zmax):.1f} digits"
        )
    sexp = int(math.floor(2.0 * math.log2(zmax))) if zmax > 0.0 else -64
    sexp = max(sexp, -64)
    coeffs = table.for_exponent(sexp)
    v = ExtComplex.square_of(z)
    inv = 2.0 ** (-sexp)  # exact rescale
    v = ExtComplex(v.re * inv, v.im * inv)
    return horner(coeffs, v).to_complex()


def _digits_at(x: float) -> float:
    return 32.0 - x * math.log10(math.e) + 0.5 * math.log10(max(x, 1.0))


def _as_complex_array(z):
    arr = np.asarray(z, dtype=np.complex128)
    return arr, arr.ndim == 0


@lru_cache(maxsize=None)
def _rgamma_rational(a: Fraction) -> float:
    """1/Gamma(a), correctly rounded for positive integers and half-integers."""
    if a <= 0 or a > 150 or a.denominator > 2:
        return rgamma(float(a))
    if a.denominator == 1:
        return 1.0 / math.factorial(int(a) - 1)
    # Gamma(n + 1/2) = (1/2)_n sqrt(pi)
    return 1.0 / (float(pochhammer(Fraction(1, 2), int(a - Fraction(1, 2)))) * math.sqrt(math.pi))


def _jtilde_prefactor(ell: int, d: int) -> float:
    return 2.0 ** (1.0 - d / 2.0 - ell) * _rgamma_rational(Fraction(2 * ell + d, 2))


def jtilde_deriv(ell: int, d: int, i: int, z):
    """i-th derivative of the entire function z^(1-d/2) J_{ell+d/2-1}(z).

    Power series differentiated term by term; no fractional powers of z occur.
    Accepts a scalar or an array of complex arguments.
    """
    if ell < 0 or d < 1 or i < 0:
        raise DomainError(f"jtilde needs ell>=0, d>=1, i>=0 (got {ell}, {d}, {i})")
    arr, scalar = _as_complex_array(z)
    flat = arr.reshape(-1)
    table = _table(Fraction(2 * ell + d, 2), ell, i)
    s = _series_sum(table, flat)
    e = ell + 2 * table.k0 - i
    out = _jtilde_prefactor(ell, d) * s * (flat ** e if e > 0 else 1.0)
    out = out.reshape(arr.shape)
    return complex(out) if scalar else out


def jtilde_series(ell: int, d: int, z):
    """S with jtilde(ell, d, z) = 2^(1-d/2-ell)/Gamma(ell+d/2) * z^ell * S(z).

    S(0) = 1 and S is even in z; the secular determinant is built from it so
    the small-|z| powers never have to be formed explicitly.
    """
    if ell < 0 or d < 1:
        raise DomainError(f"jtilde needs ell>=0, d>=1 (got {ell}, {d})")
    arr, scalar = _as_complex_array(z)
    flat = arr.reshape(-1)
    s = _series_sum(_table(Fraction(2 * ell + d, 2), ell, 0), flat).reshape(arr.shape)
    return complex(s) if scalar else s


def jtilde_prefactor(ell: int, d: int) -> float:
    return _jtilde_prefactor(ell, d)


def jtilde(ell: int, d: int, z):
    """The entire radial kernel z^(1-d/2) J_{ell+d/2-1}(z) at complex z."""
    return jtilde_deriv(ell, d, 0, z)


def bessel_j(kappa: float, x):
    """J_kappa(x) for real x >= 0 from the ascending series.

    Negative integer orders use J_{-n} = (-1)^n J_n; other negative orders go
    through the series with a reflected 1/Gamma.
    """
    kappa = float(kappa)
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    flat = arr.reshape(-1)
    if np.any(flat < 0):
        raise DomainError("bessel_j is defined here for x >= 0 only")
    if kappa < 0 and kappa == math.floor(kappa):
        n = int(-kappa)
        out = (-1) ** n * bessel_j(float(n), flat)
        return float(out[0]) if scalar else out.reshape(arr.shape)
    a = Fraction(kappa) + 1
    table = _table(a, 0, 0)
    s = _series_sum(table, flat.astype(np.complex128)).real
    with np.errstate(divide="ignore", invalid="ignore"):
        lead = np.where(flat > 0, (flat / 2.0) ** kappa, 1.0 if kappa == 0 else (0.0 if kappa > 0 else np.inf))
    out = lead * _rgamma_rational(a) * s
    return float(out[0]) if scalar else out.reshape(arr.shape)


def bessel_j_deriv(kappa: float, x):
    """J'_kappa(x) = -J_{kappa+1}(x) + (kappa/x) J_kappa(x)."""
    return -bessel_j(kappa + 1.0, x) + kappa / x * bessel_j(kappa, x)


def _mcmahon(kappa: float, k: int) -> float:
    mu = 4.0 * kappa * kappa
    beta = (k + kappa / 2.0 - 0.25) * math.pi
    return beta - (mu - 1.0) / (8.0 * beta) - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * beta) ** 3)


def _zero_guess(kappa: float, k: int) -> float:
    if k == 1 and kappa >= 1.0:
        c = kappa ** (1.0 / 3.0)
        return kappa + 1.8557571 * c + 1.033150 / c - 0.00397 / kappa
    return _mcmahon(kappa, k)


@lru_cache(maxsize=4096)
def _zero_brackets(kappa: float, k: int) -> tuple[tuple[float, float], ...]:
    """Sign-change brackets of J_kappa for its first k positive zeros."""
    step = 0.1
    hi = max(_zero_guess(kappa, k), kappa) + 3.0 * math.pi
    while True:
        top = min(hi, Z_MAX)
        grid = np.arange(step, top + step / 2, step)
        grid = grid[grid <= Z_MAX]
        vals = bessel_j(kappa, grid)
        idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
        brackets = []
        for j in idx:
            if vals[j] == 0.0 and brackets and brackets[-1][1] == grid[j]:
                continue
            brackets.append((float(grid[j]), float(grid[j + 1])))
        if len(brackets) >= k:
            return tuple(brackets[:k])
        if top >= Z_MAX:
            raise PrecisionRangeError(
                f"zero j_({kappa},{k}) lies beyond the supported range Z_MAX = {Z_MAX}"
            )
        hi *= 1.5


@lru_cache(maxsize=4096)
def bessel_j_zero(kappa: float, k: int) -> float:
    """k-th positive zero of J_kappa (kappa > -1; kappa = -1 uses the zeros of J_1).

    McMahon/Olver guess, Newton safeguarded inside a sign-change bracket,
    bisection whenever Newton leaves the bracket.
    """
    kappa = float(kappa)
    if k < 1:
        raise DomainError("zero index k must be >= 1")
    if kappa == -1.0:
        kappa = 1.0
    if kappa < -1.0:
        raise DomainError(f"zeros are only supported for kappa >= -1, got {kappa}")
    a, b = _zero_brackets(kappa, k)[k - 1]
    fa = bessel_j(kappa, a)
    if fa == 0.0:
        return a
    x = _zero_guess(kappa, k)
    if not (a < x < b):
        x = 0.5 * (a + b)
    prev_step = b - a
    for _ in range(200):
        fx = bessel_j(kappa, x)
        if fx == 0.0:
            return x
        if (fx > 0) == (fa > 0):
            a, fa = x, fx
        else:
            b = x
        dfx = bessel_j_deriv(kappa, x)
        x_new = x - fx / dfx if dfx != 0 else 0.5 * (a + b)
        if abs(x_new - x) <= 4e-16 * x or abs(b - a) <= 4e-16 * x:
            return x_new
        # rounding noise near the top of the range can stall Newton: bisect then
        if not (min(a, b) <= x_new <= max(a, b)) or abs(x_new - x) > 0.5 * prev_step:
            x_new = 0.5 * (a + b)
        prev_step = abs(x_new - x)
        x = x_new
    raise ConvergenceError(f"zero j_({kappa},{k}) did not converge in 200 iterations")


def hyp2f1_at_one(a: float, b: float, c: float) -> float:
    """Gauss's value F(a,b;c;1) = G(c)G(c-a-b)/(G(c-a)G(c-b)) for c > a+b.

    A pole of Gamma in the denominator gives 0 (with a RuntimeWarning).  For
    a non-positive integer the terminating sum is evaluated as a cross-check.
    """
    if not c > a + b:
        raise DomainError(f"F(a,b;c;1) needs c > a+b (got a={a}, b={b}, c={c})")
    s1, l1 = gamma_sign_ln(c)
    s2, l2 = gamma_sign_ln(c - a - b)
    s3, l3 = gamma_sign_ln(c - a)
    s4, l4 = gamma_sign_ln(c - b)
    if s1 == 0:
        raise DomainError(f"c = {c} is a pole of Gamma")
    if s3 == 0 or s4 == 0:
        warnings.warn(f"Gamma pole in denominator of F({a},{b};{c};1); returning 0", RuntimeWarning)
        return 0.0
    value = s1 * s2 * s3 * s4 * math.exp(l1 + l2 - l3 - l4)
    if a <= 0 and a == math.floor(a):
        term, total = 1.0, 1.0
        for n in range(int(-a)):
            term *= (a + n) * (b + n) / ((c + n) * (n + 1))
            total += term
        if not math.isclose(total, value, rel_tol=1e-10, abs_tol=1e-13):
            raise ArithmeticError(f"terminating 2F1 sum {total} disagrees with Gauss value {value}")
    return value
