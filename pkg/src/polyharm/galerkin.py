"""Exact-rational Rayleigh-Ritz oracle for (-Delta)^m u = lambda (-Delta)^(m-t) u.

Quadratic forms Q_p(u, v) = int nabla^p u . nabla^p v are assembled exactly
for polynomial bases carrying the Dirichlet factor (1 - x^2)^m, then the
generalized eigenproblem is solved in extended precision with mpmath.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import mpmath
import numpy as np
from scipy.optimize import brentq

from .errors import ConditioningError, DomainError

MAX_INTERVAL_N = 48
MAX_RADIAL_N = 24
MAX_BOX_TOTAL = 400
LCG_SEED = 0x5EED


@dataclass(frozen=True)
class RationalMatrix:
    """Exact matrix num/den with integer entries num (object array)."""

    num: np.ndarray
    den: int

    @classmethod
    def from_fractions(cls, F) -> "RationalMatrix":
        F = np.asarray(F, dtype=object)
        den = 1
        for q in F.flat:
            den = math.lcm(den, Fraction(q).denominator)
        num = np.empty(F.shape, dtype=object)
        for idx, q in np.ndenumerate(F):
            q = Fraction(q)
            num[idx] = q.numerator * (den // q.denominator)
        return cls(num, den)

    @property
    def n(self) -> int:
        return self.num.shape[0]

    def __getitem__(self, ij) -> Fraction:
        return Fraction(int(self.num[ij]), self.den)

    def is_symmetric(self) -> bool:
        return bool(np.all(self.num == self.num.T))

    def block(self, idx) -> "RationalMatrix":
        idx = list(idx)
        return RationalMatrix(self.num[np.ix_(idx, idx)], self.den)

    def quad(self, u) -> Fraction:
        """u^T M u for an exact coefficient vector."""
        u = [Fraction(x) for x in u]
        total = Fraction(0)
        for i, ui in enumerate(u):
            if ui == 0:
                continue
            row = sum(int(self.num[i, j]) * uj for j, uj in enumerate(u) if uj != 0)
            total += ui * row
        return total / self.den

    def leading_minors(self) -> list[int]:
        """Leading principal minors of num via fraction-free elimination."""
        n = self.n
        A = [[int(x) for x in row] for row in self.num]
        minors, prev = [], 1
        for c in range(n):
            piv = A[c][c]
            minors.append(piv)
            if piv == 0:
                break
            for r in range(c + 1, n):
                for j in range(c + 1, n):
                    A[r][j] = (A[r][j] * piv - A[r][c] * A[c][j]) // prev
            prev = piv
        return minors

    def is_positive_definite(self) -> bool:
        minors = self.leading_minors()
        return len(minors) == self.n and all(x > 0 for x in minors)

    def to_mp(self) -> "mpmath.matrix":
        M = mpmath.matrix(self.n, self.n)
        den = mpmath.mpf(self.den)
        for i in range(self.n):
            for j in range(self.n):
                M[i, j] = mpmath.mpf(int(self.num[i, j])) / den
        return M


# ---------------------------------------------------------------------------
# integer polynomial helpers (coefficient lists, lowest power first)


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _ppow(a, k):
    out = [1]
    for _ in range(k):
        out = _pmul(out, a)
    return out


def _pderiv(a, s=1):
    for _ in range(s):
        a = [i * a[i] for i in range(1, len(a))] or [0]
    return a


def _coeff_matrix(polys):
    D = max(len(p) for p in polys)
    C = np.zeros((len(polys), D), dtype=object)
    C[:] = 0
    for i, p in enumerate(polys):
        for j, c in enumerate(p):
            C[i, j] = c
    return C


def _gram(C1, C2, weight):
    """Exact C1 H C2^T with H_ab = weight(a+b), weight returning Fraction or 0."""
    D1, D2 = C1.shape[1], C2.shape[1]
    den = 1
    W = {}
    for s in range(D1 + D2 - 1):
        w = weight(s)
        W[s] = w
        if w:
            den = math.lcm(den, w.denominator)
    H = np.zeros((D1, D2), dtype=object)
    H[:] = 0
    for a in range(D1):
        for b in range(D2):
            w = W[a + b]
            if w:
                H[a, b] = w.numerator * (den // w.denominator)
    num = C1.dot(H).dot(C2.T)
    return RationalMatrix(num, den)


def _interval_weight(s):
    return Fraction(2, s + 1) if s % 2 == 0 else 0


# ---------------------------------------------------------------------------
# interval (-1, 1)


def _interval_polys(m, n):
    base = _ppow([1, 0, -1], m)
    return [[0] * j + base for j in range(n)]


def interval_form(m: int, p: int, n: int) -> RationalMatrix:
    """(Q_p)_ij = int_{-1}^{1} phi_i^(p) phi_j^(p), phi_j = (1-x^2)^m x^j."""
    if n < 1 or n > MAX_INTERVAL_N or m < 1 or m > 6 or not (0 <= p <= m):
        raise DomainError(f"interval basis needs 1<=n<={MAX_INTERVAL_N}, 1<=m<=6, 0<=p<=m")
    C = _coeff_matrix([_pderiv(q, p) for q in _interval_polys(m, n)])
    return _gram(C, C, _interval_weight)


def interval_forms(m: int, t: int, n: int) -> tuple[RationalMatrix, RationalMatrix]:
    if not (1 <= t <= m):
        raise DomainError("need 1 <= t <= m")
    return interval_form(m, m, n), interval_form(m, m - t, n)


def interval_parity_blocks(n: int) -> list[list[int]]:
    return [list(range(0, n, 2)), list(range(1, n, 2))]


# ---------------------------------------------------------------------------
# ball, radial part r^ell (1-r^2)^m r^(2j) in the variable s = r^2


def _radial_laplacian(c, ell, d):
    # Delta (r^ell s^a) = 2a(2 ell + 2a + d - 2) r^ell s^(a-1)
    return [2 * a * (2 * ell + 2 * a + d - 2) * c[a] for a in range(1, len(c))] or [0]


def radial_form(m: int, p: int, ell: int, d: int, n: int) -> RationalMatrix:
    if n < 1 or n > MAX_RADIAL_N or m < 1 or m > 5 or not (0 <= p <= m) or ell < 0 or d < 1:
        raise DomainError(f"radial basis needs 1<=n<={MAX_RADIAL_N}, 1<=m<=5, 0<=p<=m")
    base = _ppow([1, -1], m)
    polys = [[0] * j + base for j in range(n)]
    q = p // 2

    def lap(c, times):
        for _ in range(times):
            c = _radial_laplacian(c, ell, d)
        return c

    def weight(s):
        return Fraction(1, 2 * ell + 2 * s + d)

    C1 = _coeff_matrix([lap(c, q) for c in polys])
    if p % 2 == 0:
        return _gram(C1, C1, weight)
    C2 = _coeff_matrix([lap(c, q + 1) for c in polys])
    G = _gram(C1, C2, weight)
    return RationalMatrix(-G.num, G.den)


def radial_forms(m: int, t: int, ell: int, d: int, n: int) -> tuple[RationalMatrix, RationalMatrix]:
    if not (1 <= t <= m):
        raise DomainError("need 1 <= t <= m")
    return radial_form(m, m, ell, d, n), radial_form(m, m - t, ell, d, n)


# ---------------------------------------------------------------------------
# hyperrectangle prod (-a_p, a_p), tensor basis prod (1 - y_p^2)^m y_p^j, y = x/a


def _multi_indices(p, d):
    if d == 1:
        yield (p,)
        return
    for first in range(p + 1):
        for rest in _multi_indices(p - first, d - 1):
            yield (first,) + rest


def _frac_array(R: RationalMatrix):
    out = np.empty(R.num.shape, dtype=object)
    for idx, x in np.ndenumerate(R.num):
        out[idx] = Fraction(int(x), R.den)
    return out


def box_form(m: int, p: int, sides, n: int) -> RationalMatrix:
    sides = [Fraction(str(a)) for a in sides]
    d = len(sides)
    if d < 1 or m < 1 or m > 3 or n < 1 or n ** d > MAX_BOX_TOTAL or not (0 <= p <= m):
        raise DomainError(f"box basis needs m<=3 and n^d <= {MAX_BOX_TOTAL}")
    if any(a <= 0 for a in sides):
        raise DomainError("half-lengths must be positive")
    unit = [_frac_array(interval_form(m, s, n)) for s in range(p + 1)]
    total = None
    for alpha in _multi_indices(p, d):
        coef = Fraction(math.factorial(p))
        for s in alpha:
            coef /= math.factorial(s)
        term = None
        for a, s in zip(sides, alpha):
            g = unit[s] * (a ** (1 - 2 * s))
            term = g if term is None else np.kron(term, g)
        term = term * coef
        total = term if total is None else total + term
    return RationalMatrix.from_fractions(total)


def box_forms(m: int, t: int, sides, n: int) -> tuple[RationalMatrix, RationalMatrix]:
    if not (1 <= t <= m):
        raise DomainError("need 1 <= t <= m")
    return box_form(m, m, sides, n), box_form(m, m - t, sides, n)


def box_parity_blocks(n: int, d: int) -> list[list[int]]:
    blocks: dict = {}
    for flat, js in enumerate(product(range(n), repeat=d)):
        blocks.setdefault(tuple(j % 2 for j in js), []).append(flat)
    return [blocks[k] for k in sorted(blocks)]


# ---------------------------------------------------------------------------
# generalized symmetric eigenproblem


def gen_sym_eig(A: RationalMatrix, B: RationalMatrix, count: int | None = None, dps: int | None = None) -> list[float]:
    """Smallest generalized eigenvalues of A v = lambda B v (B positive definite).

    Cholesky B = L L^T, eigenvalues of L^-1 A L^-T, all in mpmath at a working
    precision that grows with n to absorb the monomial-basis conditioning.
    """
    n = A.n
    if B.n != n:
        raise DomainError("A and B must have the same size")
    if not B.is_positive_definite():
        raise ConditioningError("mass matrix is not positive definite; reduce the basis size")
    dps = dps or 60 + 3 * n
    with mpmath.workdps(dps):
        Am, Bm = A.to_mp(), B.to_mp()
        try:
            L = mpmath.cholesky(Bm)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConditioningError(f"Cholesky breakdown at n={n}; reduce the basis size") from exc
        Li = mpmath.inverse(L)
        M = Li * Am * Li.T
        M = (M + M.T) / 2
        evals = mpmath.eigsy(M, eigvals_only=True)
        vals = sorted(float(x) for x in evals)
    return vals if count is None else vals[:count]


def _blocked_eigs(A, B, blocks, count):
    vals = []
    for idx in blocks:
        if idx:
            vals.extend(gen_sym_eig(A.block(idx), B.block(idx)))
    vals.sort()
    return vals if count is None else vals[:count]


@dataclass(frozen=True)
class GalerkinBasis:
    geometry: str  # "interval" | "box" | "radial"
    m: int
    n: int
    sides: tuple = ()
    d: int = 1
    ell: int = 0

    def form(self, p: int) -> RationalMatrix:
        if self.geometry == "interval":
            return interval_form(self.m, p, self.n)
        if self.geometry == "radial":
            return radial_form(self.m, p, self.ell, self.d, self.n)
        if self.geometry == "box":
            return box_form(self.m, p, self.sides, self.n)
        raise DomainError(f"unknown geometry {self.geometry!r}")

    @property
    def size(self) -> int:
        return self.n ** len(self.sides) if self.geometry == "box" else self.n

    def blocks(self) -> list[list[int]]:
        if self.geometry == "interval":
            return interval_parity_blocks(self.n)
        if self.geometry == "box":
            return box_parity_blocks(self.n, len(self.sides))
        return [list(range(self.n))]

    def polynomial(self, j: int) -> list[int]:
        """Integer coefficients of the j-th basis function (1D geometries)."""
        if self.geometry == "interval":
            return _interval_polys(self.m, self.n)[j]
        if self.geometry == "radial":
            # in s = r^2, times r^ell
            return [0] * j + _ppow([1, -1], self.m)
        raise DomainError("box basis functions are tensor products")


def ritz_values(basis: GalerkinBasis, t: int, count: int | None = None) -> list[float]:
    if not (1 <= t <= basis.m):
        raise DomainError("need 1 <= t <= m")
    A, B = basis.form(basis.m), basis.form(basis.m - t)
    return _blocked_eigs(A, B, basis.blocks(), count)


# ---------------------------------------------------------------------------
# reference values and property checks


def clamped_beam_beta(index: int = 1) -> float:
    """index-th root of cos(2 beta) cosh(2 beta) = 1 (clamped beam on (-1, 1))."""
    if index < 1:
        raise DomainError("index >= 1")
    # f(x) = cos x - 1/cosh x has the same roots as cos x cosh x - 1, bounded
    f = lambda x: math.cos(x) - 1.0 / math.cosh(x)  # noqa: E731
    c = (index + 0.5) * math.pi
    x = brentq(f, c - 0.5, c + 0.5, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return x / 2


def clamped_beam_reference(index: int = 1) -> float:
    return clamped_beam_beta(index) ** 4


def lcg_sequence(count: int, seed: int = LCG_SEED):
    """Numerical Recipes 32-bit LCG: x <- (1664525 x + 1013904223) mod 2^32."""
    x = seed
    for _ in range(count):
        x = (1664525 * x + 1013904223) % 2 ** 32
        yield x


def lcg_vectors(n: int, count: int, seed: int = LCG_SEED) -> list[list[int]]:
    """Integer coefficient vectors with entries in [-1000, 1000], never zero."""
    stream = lcg_sequence(n * count, seed)
    out = []
    for _ in range(count):
        v = [next(stream) % 2001 - 1000 for _ in range(n)]
        if not any(v):
            v[0] = 1
        out.append(v)
    return out


def _ln_frac(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)


def gn_check(u, basis: GalerkinBasis, t: int, s: int, forms: dict | None = None) -> float:
    """ln rhs - ln lhs of (Q_{m-t})^s <= (Q_{m-s})^t (Q_m)^(s-t)."""
    m = basis.m
    if not (0 <= t <= s <= m):
        raise DomainError("need 0 <= t <= s <= m")
    if not any(u):
        raise DomainError("u must be nonzero")
    forms = forms if forms is not None else {}

    def q(p):
        if p not in forms:
            forms[p] = basis.form(p)
        return forms[p].quad(u)

    if t == s or t == 0:
        return 0.0
    lhs = s * _ln_frac(q(m - t))
    rhs = t * _ln_frac(q(m - s)) + (s - t) * _ln_frac(q(m))
    return rhs - lhs


def cauchy_schwarz_chain(basis: GalerkinBasis) -> list[tuple[int, int, bool]]:
    """Q_p(e_i)^2 <= Q_{p-1}(e_i) Q_{p+1}(e_i) exactly, for every basis vector."""
    forms = [basis.form(p) for p in range(basis.m + 1)]
    out = []
    for p in range(1, basis.m):
        for i in range(basis.size):
            a, b, c = forms[p - 1][i, i], forms[p][i, i], forms[p + 1][i, i]
            out.append((p, i, b * b <= a * c))
    return out
