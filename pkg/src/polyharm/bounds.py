"""Closed-form bounds, exact integrals and asymptotics for ball eigenvalues.

Everything Gamma-heavy is carried as a :class:`LogValue` so that m up to ~14
(values near 10^30 and beyond) never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import specfun
from .ball_secular import ProblemSpec
from .errors import DomainError
from .specfun import double_factorial, ln_gamma


@dataclass(frozen=True)
class LogValue:
    sign: int
    ln_mag: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or 1")
        if (self.sign == 0) != (self.ln_mag == -math.inf):
            raise ValueError("sign 0 must pair with ln_mag = -inf")

    @classmethod
    def of(cls, x) -> "LogValue":
        if x == 0:
            return cls(0, -math.inf)
        if isinstance(x, (int, Fraction)):
            ln = _ln_abs_exact(x)
        else:
            ln = math.log(abs(x))
        return cls(1 if x > 0 else -1, ln)

    @classmethod
    def from_ln(cls, ln: float) -> "LogValue":
        return cls(1, ln)

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0 or other.sign == 0:
            return ZERO
        return LogValue(self.sign * other.sign, self.ln_mag + other.ln_mag)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.sign == 0:
            raise ZeroDivisionError("LogValue division by zero")
        if self.sign == 0:
            return ZERO
        return LogValue(self.sign * other.sign, self.ln_mag - other.ln_mag)

    def __pow__(self, p: float) -> "LogValue":
        if self.sign < 0:
            raise DomainError("real power of a negative LogValue")
        if self.sign == 0:
            return ZERO
        return LogValue(1, self.ln_mag * p)

    def value(self) -> float:
        """Plain float; raises OverflowError when not representable."""
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.ln_mag)

    def root(self, n: float) -> float:
        return (self ** (1.0 / n)).value()

    def __le__(self, other: "LogValue") -> bool:
        return _key(self) <= _key(other)

    def __lt__(self, other: "LogValue") -> bool:
        return _key(self) < _key(other)


ZERO = LogValue(0, -math.inf)


def _key(v: LogValue):
    if v.sign == 0:
        return (0, 0.0)
    return (v.sign, v.sign * v.ln_mag)


def _ln_abs_exact(q) -> float:
    q = Fraction(q)
    return math.log(abs(q.numerator)) - math.log(q.denominator)


def dirichlet_lower(m: int, d: int) -> LogValue:
    """2^(2m) Gamma(m+1) Gamma(m+d/2) / Gamma(d/2)."""
    _check_md(m, d)
    return LogValue.from_ln(2 * m * math.log(2) + ln_gamma(m + 1) + ln_gamma(m + d / 2) - ln_gamma(d / 2))


def dirichlet_upper(m: int, d: int) -> LogValue:
    _check_md(m, d)
    return upper_mt(m, 0, d)


def upper_mt(m: int, h: int, d: int) -> LogValue:
    """Rayleigh quotient of (1-|x|^2)^m for the (m, m-h) problem."""
    _check_md(m, d)
    if not (0 <= h < m):
        raise DomainError(f"upper_mt needs 0 <= h < m, got h={h}, m={m}")
    ln = (
        (2 * m - 2 * h) * math.log(2)
        + 2 * ln_gamma(m - h + 1)
        + ln_gamma(2 * m - h + 1 + d / 2)
        - math.log(m + d / 2)
        - ln_gamma(h + d / 2)
        - ln_gamma(2 * m - 2 * h + 1)
    )
    return LogValue.from_ln(ln)


def _check_md(m, d):
    if m < 1 or d < 1:
        raise DomainError(f"need m >= 1 and d >= 1, got m={m}, d={d}")


@dataclass(frozen=True)
class ProductBound:
    lower: LogValue
    upper: LogValue
    kappa_minus_one: bool  # a J_{-1} zero was replaced by a J_1 zero


def product_lower_and_bessel_upper(m: int, t: int, d: int) -> ProductBound:
    """prod_{h=m-t}^{m-1} j_{h+d/2-2,1}^2  <=  lambda_1  <=  j_{m+d/2-2,1}^(2t)."""
    if not (1 <= t <= m):
        raise DomainError("need 1 <= t <= m")
    flagged = False
    ln = 0.0
    for h in range(m - t, m):
        kappa = h + d / 2 - 2
        if kappa < -1:
            raise DomainError(f"Bessel order {kappa} < -1 in the product bound for (m,t,d)=({m},{t},{d})")
        flagged |= kappa == -1
        ln += 2 * math.log(specfun.bessel_j_zero(kappa, 1))
    kappa = m + d / 2 - 2
    if kappa < -1:
        raise DomainError(f"Bessel order {kappa} < -1 for (m,t,d)=({m},{t},{d})")
    flagged |= kappa == -1
    up = 2 * t * math.log(specfun.bessel_j_zero(kappa, 1))
    return ProductBound(LogValue.from_ln(ln), LogValue.from_ln(up), flagged)


def product_lower_shifted(m: int, t: int, d: int) -> LogValue:
    """Same product with h running over m-t+1 .. m (direct substitution of
    lambda_1^(h,1) = j_{h+d/2-2,1}^2 into the generalized Payne inequality)."""
    ln = 0.0
    for h in range(m - t + 1, m + 1):
        ln += 2 * math.log(specfun.bessel_j_zero(max(h + d / 2 - 2, -1.0), 1))
    return LogValue.from_ln(ln)


def sigma_aux(m: int, t: int, d: int) -> LogValue:
    if not (1 <= t <= m):
        raise DomainError("need 1 <= t <= m")
    return LogValue.of(sigma_aux_exact(m, t, d))


def sigma_aux_exact(m: int, t: int, d: int) -> Fraction:
    df = double_factorial
    if t == m:
        # 2^(2m) m! Gamma(m+d/2)/Gamma(d/2) = 4^m m! (d/2)_m
        return Fraction(4 ** m * math.factorial(m)) * specfun.pochhammer(Fraction(d, 2), m)
    if (m - t) % 2 == 0:
        return Fraction(df(m + t) * df(m + t + d - 2), df(m - t) * df(m - t + d - 2))
    return Fraction(df(m + t - 1) * df(m + t + d - 1), df(m - t - 1) * df(m - t + d - 1))


def sphere_area_ln(d: int) -> float:
    """ln |S^(d-1)| = ln(2 pi^(d/2) / Gamma(d/2))."""
    return math.log(2) + d / 2 * math.log(math.pi) - ln_gamma(d / 2)


def grad_t_norm_ball(m: int, t: int, d: int) -> LogValue:
    """Integral over the unit ball of |nabla^t (1-|x|^2)^m|^2."""
    if not (0 <= t <= m):
        raise DomainError("need 0 <= t <= m")
    ln = (
        sphere_area_ln(d)
        + (2 * t - 1) * math.log(2)
        + 2 * ln_gamma(m + 1)
        + ln_gamma(t + d / 2)
        + ln_gamma(2 * m - 2 * t + 1)
        - 2 * ln_gamma(m - t + 1)
        - ln_gamma(2 * m - t + 1 + d / 2)
    )
    return LogValue.from_ln(ln)


def radial_iterated_laplacian(m: int, t: int, d: int) -> list[Fraction]:
    """Coefficients c_q of Delta^t (1-r^2)^m = sum_q c_q r^(2q)."""
    if not (0 <= t <= m):
        raise DomainError("need 0 <= t <= m")
    df = double_factorial
    coeffs = [Fraction(0)] * (m - t + 1)
    for h in range(t, m + 1):
        c = math.comb(m, h) * (-1) ** h
        c = Fraction(c * df(2 * h) * df(2 * h + d - 2), df(2 * h - 2 * t) * df(2 * h + d - 2 * t - 2))
        coeffs[h - t] += c
    return coeffs


def beta_moment(alpha: int, beta: int) -> Fraction:
    """Integral of (1-r^2)^alpha r^beta over [0, 1]."""
    if alpha < 0 or beta < 0:
        raise DomainError("beta_moment needs alpha, beta >= 0")
    df = double_factorial
    return Fraction(df(2 * alpha) * df(beta - 1), df(beta + 2 * alpha + 1))


def two_term_asymptotic(m: float, d: float) -> float:
    return 2 * m / math.e + d / (2 * math.e) * math.log(m)


def erve_bound(m: int) -> float:
    if m < 1:
        raise DomainError("m >= 1 required")
    lf = lambda n: ln_gamma(n + 1)  # noqa: E731
    ln = 2 * lf(m) + lf(4 * m + 1) - lf(2 * m) - lf(2 * m + 1)
    return 0.5 * math.exp(ln / (2 * m))


def navier_reference(m: int, d: int) -> LogValue:
    _check_md(m, d)
    j = specfun.bessel_j_zero(d / 2 - 1, 1)
    return LogValue.from_ln(2 * m * math.log(j))


def ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def weyl_leading(k: int, t: int, d: int, volume: float) -> float:
    """Leading Weyl term for lambda_k^(1/2t); independent of t by design."""
    if k < 1 or volume <= 0:
        raise DomainError("need k >= 1 and volume > 0")
    return 2 * math.pi * (k / (ball_volume(d) * volume)) ** (1 / d)


def hyperrectangle_lower(m: int, sides) -> LogValue:
    sides = list(sides)
    if not sides:
        raise DomainError("hyperrectangle needs at least one side")
    if any(a <= 0 for a in sides):
        raise DomainError("half-lengths must be positive")
    # log-sum-exp of -2m ln a_p
    logs = [-2 * m * math.log(a) for a in sides]
    top = max(logs)
    lse = top + math.log(sum(math.exp(x - top) for x in logs))
    return LogValue.from_ln(ln_gamma(2 * m + 1) + lse)


def general_domain_enclosure(
    k: int, m: int, h: int, diameter: float, inradius: float, d: int, ball_interval=None
) -> tuple[LogValue, LogValue]:
    """Enclosure of lambda_k^(m, m-h) from ball comparison and scaling.

    The lower end uses the circumscribed ball of radius diameter/2, the upper
    end k disjoint balls of radius inradius/k.  ``ball_interval`` may replace
    the default [sigma, upper_mt] bracket of the unit-ball fundamental tone.
    """
    if not (0 <= h < m):
        raise DomainError("need 0 <= h < m")
    if k < 1 or inradius <= 0 or diameter < 2 * inradius * (1 - 1e-12):
        raise DomainError("inconsistent geometry: need diameter >= 2 inradius > 0 and k >= 1")
    t = m - h
    if ball_interval is None:
        lo, hi = dirichlet_lower(t, d), upper_mt(m, h, d)
    else:
        lo, hi = (v if isinstance(v, LogValue) else LogValue.of(v) for v in ball_interval)
    rho_e = diameter / 2
    rho_i = inradius / k
    return (
        LogValue(lo.sign, lo.ln_mag - 2 * t * math.log(rho_e)),
        LogValue(hi.sign, hi.ln_mag - 2 * t * math.log(rho_i)),
    )


@dataclass
class BoundsReport:
    spec: ProblemSpec
    lower: LogValue
    upper: LogValue
    normalized_lower: float
    normalized_upper: float
    asymptotic_two_term: float
    sources: dict = field(default_factory=dict)


def bounds_report(m: int, d: int, h: int = 0) -> BoundsReport:
    """Fundamental-tone bracket for the (m, m-h) ball problem."""
    t = m - h
    spec = ProblemSpec(d, m, t)
    if h == 0:
        lo, hi = dirichlet_lower(m, d), dirichlet_upper(m, d)
        src = {"lower": "sigma(m,m)", "upper": "test function (1-r^2)^m"}
    else:
        lo, hi = dirichlet_lower(t, d), upper_mt(m, h, d)
        src = {"lower": "lambda_1^(m-h) of the ball, sigma form", "upper": "test function (1-r^2)^m"}
    return BoundsReport(
        spec, lo, hi,
        math.exp(lo.ln_mag / (2 * t)), math.exp(hi.ln_mag / (2 * t)),
        two_term_asymptotic(m, d) if m >= 2 else math.nan, src,
    )
