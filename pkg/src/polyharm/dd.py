"""Double-double ("ExtReal") arithmetic on numpy arrays.

A value is the unevaluated sum ``hi + lo`` of two float64 arrays with
``|lo| <= ulp(hi)/2``, giving roughly 32 significant digits.  All operations
are elementwise and vectorized so that a whole root scan can be pushed through
one series evaluation.  The algorithms are the standard error-free
transformations (Knuth two-sum, Dekker split/two-prod).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


class ExtReal:
    """Array of double-double reals."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=None):
        self.hi = np.asarray(hi, dtype=np.float64)
        self.lo = np.zeros_like(self.hi) if lo is None else np.asarray(lo, dtype=np.float64)

    @classmethod
    def from_fraction(cls, q: Fraction) -> "ExtReal":
        hi = float(q)
        lo = float(q - Fraction(hi))
        return cls(hi, lo)

    @classmethod
    def from_fractions(cls, qs) -> "ExtReal":
        his = [float(q) for q in qs]
        los = [float(q - Fraction(h)) for q, h in zip(qs, his)]
        return cls(np.array(his), np.array(los))

    def __getitem__(self, idx) -> "ExtReal":
        return ExtReal(self.hi[idx], self.lo[idx])

    def __float__(self) -> float:
        return float(self.hi + self.lo)

    def to_float(self) -> np.ndarray:
        return self.hi + self.lo

    def to_fraction(self) -> Fraction:
        return Fraction(float(self.hi)) + Fraction(float(self.lo))

    def __neg__(self) -> "ExtReal":
        return ExtReal(-self.hi, -self.lo)

    def __add__(self, other) -> "ExtReal":
        if not isinstance(other, ExtReal):
            s, e = two_sum(self.hi, np.asarray(other, dtype=np.float64))
            e = e + self.lo
            return ExtReal(*quick_two_sum(s, e))
        s, e = two_sum(self.hi, other.hi)
        t, f = two_sum(self.lo, other.lo)
        e = e + t
        s, e = quick_two_sum(s, e)
        e = e + f
        return ExtReal(*quick_two_sum(s, e))

    __radd__ = __add__

    def __sub__(self, other) -> "ExtReal":
        return self + (-other)

    def __rsub__(self, other) -> "ExtReal":
        return (-self) + other

    def __mul__(self, other) -> "ExtReal":
        if not isinstance(other, ExtReal):
            b = np.asarray(other, dtype=np.float64)
            p, e = two_prod(self.hi, b)
            e = e + self.lo * b
            return ExtReal(*quick_two_sum(p, e))
        p, e = two_prod(self.hi, other.hi)
        e = e + (self.hi * other.lo + self.lo * other.hi)
        return ExtReal(*quick_two_sum(p, e))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExtReal":
        if not isinstance(other, ExtReal):
            b = np.asarray(other, dtype=np.float64)
            q1 = self.hi / b
            p, e = two_prod(q1, b)
            s, f = two_sum(self.hi, -p)
            f = f - e + self.lo
            q2 = (s + f) / b
            return ExtReal(*quick_two_sum(q1, q2))
        q1 = self.hi / other.hi
        r = self - other * q1
        q2 = r.hi / other.hi
        r = r - other * q2
        q3 = r.hi / other.hi
        q1, q2 = quick_two_sum(q1, q2)
        return ExtReal(q1, q2) + q3

    def __repr__(self) -> str:
        return f"ExtReal(hi={self.hi!r}, lo={self.lo!r})"


class ExtComplex:
    """Array of complex numbers with ExtReal components."""

    __slots__ = ("re", "im")

    def __init__(self, re: ExtReal, im: ExtReal):
        self.re = re
        self.im = im

    @classmethod
    def from_complex(cls, z) -> "ExtComplex":
        z = np.asarray(z, dtype=np.complex128)
        return cls(ExtReal(z.real.copy()), ExtReal(z.imag.copy()))

    @classmethod
    def square_of(cls, z) -> "ExtComplex":
        """z**2 for double-precision complex z, rounded only at the dd level."""
        z = np.asarray(z, dtype=np.complex128)
        x, y = z.real, z.imag
        xx = ExtReal(*two_prod(x, x))
        yy = ExtReal(*two_prod(y, y))
        xy = ExtReal(*two_prod(x, y))
        return cls(xx - yy, xy * 2.0)

    def __add__(self, other) -> "ExtComplex":
        if isinstance(other, ExtComplex):
            return ExtComplex(self.re + other.re, self.im + other.im)
        return ExtComplex(self.re + other, self.im)

    def __mul__(self, other) -> "ExtComplex":
        if isinstance(other, ExtComplex):
            re = self.re * other.re - self.im * other.im
            im = self.re * other.im + self.im * other.re
            return ExtComplex(re, im)
        return ExtComplex(self.re * other, self.im * other)

    def to_complex(self) -> np.ndarray:
        return self.re.to_float() + 1j * self.im.to_float()


def _dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    return quick_two_sum(p, e + (ah * bl + al * bh))


def _dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    s, e = quick_two_sum(s, e + t)
    return quick_two_sum(s, e + f)


def _horner_point(ch, cl, xh, xl, yh, yl):
    # one point in plain Python floats; same arithmetic as the array path
    rh, rl, ih, il = ch[-1], cl[-1], 0.0, 0.0
    for k in range(len(ch) - 2, -1, -1):
        a = _dd_mul(rh, rl, xh, xl)
        b = _dd_mul(ih, il, yh, yl)
        c = _dd_mul(rh, rl, yh, yl)
        d = _dd_mul(ih, il, xh, xl)
        rh, rl = _dd_add(*a, -b[0], -b[1])
        ih, il = _dd_add(*c, *d)
        rh, rl = _dd_add(rh, rl, ch[k], cl[k])
    return rh, rl, ih, il


_POINTWISE_MAX = 4


def horner(coeffs: ExtReal, v: ExtComplex) -> ExtComplex:
    """Evaluate sum_k coeffs[k] * v**k in double-double (coeffs are scalars)."""
    n = coeffs.hi.shape[0]
    shape = v.re.hi.shape
    if v.re.hi.size <= _POINTWISE_MAX:
        # numpy call overhead dominates for a handful of points
        ch, cl = coeffs.hi.tolist(), coeffs.lo.tolist()
        pts = zip(v.re.hi.ravel().tolist(), v.re.lo.ravel().tolist(),
                  v.im.hi.ravel().tolist(), v.im.lo.ravel().tolist())
        res = np.array([_horner_point(ch, cl, *pt) for pt in pts], dtype=np.float64).reshape(-1, 4)
        return ExtComplex(
            ExtReal(res[:, 0].reshape(shape), res[:, 1].reshape(shape)),
            ExtReal(res[:, 2].reshape(shape), res[:, 3].reshape(shape)),
        )
    acc = ExtComplex(
        ExtReal(np.full(shape, coeffs.hi[n - 1]), np.full(shape, coeffs.lo[n - 1])),
        ExtReal(np.zeros(shape)),
    )
    for k in range(n - 2, -1, -1):
        acc = acc * v
        acc = ExtComplex(acc.re + coeffs[k], acc.im)
    return acc
