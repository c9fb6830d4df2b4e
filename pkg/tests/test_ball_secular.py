import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyharm import ball_secular as bs
from polyharm import specfun
from polyharm.errors import DomainError, PrecisionRangeError

# independent references, computed once with mpmath at 30 digits from the
# Bessel cross-product conditions of the clamped problems
CLAMPED_DISK_RHO = 3.19622061658254109398
CLAMPED_DISK_LAM = 104.363105558844306921722619673
CLAMPED_DISK_ELL1 = 452.004510133173698846791659526
CLAMPED_BALL3_ELL0 = 237.721067531116646590002271471
CLAMPED_BALL3_ELL1 = 769.963483241901793523341047075
CLAMPED_BEAM_LAM1 = 31.2852438587770372481399413409

CFG = bs.ScanConfig(rho_max=12.0)


def first_root(d, m, t, ell, cfg=CFG):
    return bs.scan_ell(bs.ProblemSpec(d, m, t), ell, cfg).roots[0]


# ---- exact algebra ---------------------------------------------------------------

def test_det_B_example():
    assert bs.det_B_check(5, 7) == (294912, 294912)


@given(st.integers(1, 9), st.integers(0, 30))
def test_det_B_independent_of_ell(n, ell):
    lhs, rhs = bs.det_B_check(n, ell)
    assert lhs == rhs


def test_det_B_via_fractions():
    # Gaussian elimination over the rationals as an independent determinant
    from fractions import Fraction
    B = [[Fraction(v) for v in row] for row in bs.build_B(6, 3)]
    det = Fraction(1)
    for c in range(6):
        det *= B[c][c]
        for r in range(c + 1, 6):
            f = B[r][c] / B[c][c]
            for j in range(c, 6):
                B[r][j] -= f * B[c][j]
    assert det == bs.det_B_closed(6)


def test_alpha_small_cases():
    assert bs.alpha_coeff(1, 0, 5) == 5
    assert bs.alpha_coeff(3, -1, 2) == 0
    # p = 2: x(x-1) = a0 + a1 x on x = k, k+2  ->  a1 = 2k+1, a0 = -k(k+2)
    for k in range(6):
        assert bs.alpha_coeff(2, 1, k) == 2 * k + 1
        assert bs.alpha_coeff(2, 0, k) == -k * (k + 2)
    with pytest.raises(DomainError):
        bs.alpha_coeff(2, 2, 0)


@given(st.integers(1, 8), st.integers(0, 12))
def test_reduction_identities_exact(m, k):
    for j in range(1, m + 1):
        lhs, rhs = bs.reduction_identity_i(m, k, j)
        assert lhs == rhs
    lhs, rhs = bs.reduction_identity_ii(m, k)
    assert lhs == rhs


@pytest.mark.parametrize("m,k,d", [(1, 0, 1), (2, 3, 2), (4, 1, 3), (6, 0, 2), (5, 2, 5)])
def test_reduction_identity_iii(m, k, d):
    for z in (0.7, 3 + 2j, 12j, 20 * np.exp(0.4j)):
        assert bs.reduction_identity_iii(m, k, d, z) <= 1e-10


@pytest.mark.parametrize("d,m,t", [(1, 2, 1), (2, 3, 2), (2, 4, 2), (3, 3, 1), (2, 3, 3), (3, 4, 3)])
def test_det_A_factorization(d, m, t):
    spec = bs.ProblemSpec(d, m, t)
    for ell in (0, 1):
        for rho in (0.8, 2.5, 6.0):
            assert bs.det_A_factor_check(spec, ell, rho) <= 1e-10


# ---- determinant --------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_complex_det_vs_numpy(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    assert bs.complex_det(M) == pytest.approx(np.linalg.det(M), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2 ** 32 - 1))
def test_complex_det_multilinear_and_alternating(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    r = rng.normal(size=n) + 1j * rng.normal(size=n)
    c = complex(rng.normal(), rng.normal())
    A, B = M.copy(), M.copy()
    A[0] = c * M[0] + r
    B[0] = r
    assert bs.complex_det(A) == pytest.approx(c * bs.complex_det(M) + bs.complex_det(B), rel=1e-9, abs=1e-9)
    S = M[[1, 0] + list(range(2, n))]
    assert bs.complex_det(S) == pytest.approx(-bs.complex_det(M), rel=1e-12)


def test_complex_det_batched():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(7, 4, 4)) + 0j
    assert np.allclose(bs.complex_det(M), np.linalg.det(M), rtol=1e-12)


# ---- secular function ----------------------------------------------------------------

def test_build_L_t1_is_kernel():
    L = bs.build_L(1, 2, 3, 1.7)
    assert L.shape == (1, 1)
    assert L[0, 0] == pytest.approx(specfun.jtilde(2, 3, 1.7))


@pytest.mark.parametrize("d,m,t", [(2, 2, 2), (3, 3, 3), (2, 4, 3), (1, 3, 2), (4, 2, 2)])
def test_projection_stays_on_ray(d, m, t):
    # values() raises if the determinant leaves the reference ray
    F = bs.Secular(bs.ProblemSpec(d, m, t), 1 if d > 1 else 0, bs.ScanConfig(rho_max=30))
    f, mag = F.values(np.linspace(1e-3, 30, 600))
    assert np.all(np.isfinite(f)) and np.all(np.abs(f) <= mag * (1 + 1e-12))


def test_secular_samples_and_call():
    F = bs.secular(bs.ProblemSpec(2, 2, 2), 0, CFG)
    val, mag = F(CLAMPED_DISK_RHO)
    assert abs(val) <= 1e-12 * F(1.0)[1]
    s = F.samples([1.0, 2.0])
    assert [x.rho for x in s] == [1.0, 2.0]
    assert s[0].projected == pytest.approx(F(1.0)[0])


def test_secular_rejects_inadmissible_degree():
    with pytest.raises(DomainError):
        bs.Secular(bs.ProblemSpec(1, 2, 2), 2, CFG)


# ---- roots against references -------------------------------------------------------

def test_clamped_disk():
    rho = first_root(2, 2, 2, 0)
    assert rho == pytest.approx(CLAMPED_DISK_RHO, rel=1e-12)
    assert rho ** 4 == pytest.approx(CLAMPED_DISK_LAM, rel=1e-11)
    assert first_root(2, 2, 2, 1) ** 4 == pytest.approx(CLAMPED_DISK_ELL1, rel=1e-11)


def test_clamped_ball_3d():
    assert first_root(3, 2, 2, 0) ** 4 == pytest.approx(CLAMPED_BALL3_ELL0, rel=1e-11)
    assert first_root(3, 2, 2, 1) ** 4 == pytest.approx(CLAMPED_BALL3_ELL1, rel=1e-11)


def test_clamped_beam_as_one_dimensional_ball():
    assert first_root(1, 2, 2, 0) ** 4 == pytest.approx(CLAMPED_BEAM_LAM1, rel=1e-11)
    # the odd mode of the beam coincides with the radial clamped 3-ball mode
    assert first_root(1, 2, 2, 1) ** 4 == pytest.approx(CLAMPED_BALL3_ELL0, rel=1e-11)


@pytest.mark.parametrize("d,m", [(1, 1), (2, 1), (3, 1), (2, 2), (2, 3), (3, 2), (4, 3)])
def test_single_condition_roots_are_bessel_zeros(d, m):
    spec = bs.ProblemSpec(d, m, 1)
    for ell in (0, 1):
        roots = bs.scan_ell(spec, ell, bs.ScanConfig(rho_max=20)).roots
        kappa = ell + m + d / 2 - 2
        ref = [specfun.bessel_j_zero(kappa, k) for k in range(1, len(roots) + 1)]
        assert len(roots) >= 3
        assert np.allclose(roots, ref, rtol=1e-12)
        assert ref[-1] < 20 and (len(ref) == 0 or specfun.bessel_j_zero(kappa, len(roots) + 1) > 20)


def test_roots_strictly_increasing_and_in_range():
    roots = bs.scan_ell(bs.ProblemSpec(2, 3, 3), 2, bs.ScanConfig(rho_max=25)).roots
    assert roots == sorted(roots) and len(set(roots)) == len(roots)
    assert all(1e-3 < r <= 25 for r in roots)


def test_eigenvalues_for_ell():
    lams = bs.eigenvalues_for_ell(bs.ProblemSpec(2, 1, 1), 0, CFG)
    assert lams[0] == pytest.approx(specfun.bessel_j_zero(0, 1) ** 2, rel=1e-12)


def test_suspected_double_root_warns(monkeypatch):
    class Touching:
        def __init__(self, *a):
            pass

        def values(self, rho):
            rho = np.atleast_1d(rho)
            return (rho - 5.0) ** 2 + 1e-30, np.abs(rho - 5.0) ** 2 + 1.0

    monkeypatch.setattr(bs, "Secular", Touching)
    with pytest.warns(bs.SuspectedDoubleRootWarning):
        res = bs.scan_ell(bs.ProblemSpec(2, 2, 2), 0, bs.ScanConfig(rho_max=10, step=0.1))
    assert res.roots == [] and len(res.suspected) == 1
    assert abs(res.suspected[0] - 5.0) <= 0.1


# ---- assembly --------------------------------------------------------------------------

def test_spherical_multiplicity():
    assert [bs.spherical_multiplicity(1, l) for l in range(3)] == [1, 1, 0]
    assert [bs.spherical_multiplicity(2, l) for l in range(4)] == [1, 2, 2, 2]
    assert [bs.spherical_multiplicity(3, l) for l in range(4)] == [1, 3, 5, 7]
    for d in range(3, 7):
        for l in range(8):
            ref = math.comb(l + d - 1, d - 1) - (math.comb(l + d - 3, d - 1) if l >= 2 else 0)
            assert bs.spherical_multiplicity(d, l) == ref


def test_assemble_disk_dirichlet():
    entries = bs.assemble_spectrum(bs.ProblemSpec(2, 1, 1), 10)
    lams = bs.expand_ordinals(entries, 10)
    zeros = sorted(specfun.bessel_j_zero(l, k) ** 2 * (1 if l == 0 else 1) for l in range(6) for k in range(1, 5))
    ref = []
    for z in zeros:
        l = next(l for l in range(6) for k in range(1, 5) if specfun.bessel_j_zero(l, k) ** 2 == z)
        ref.extend([z] * (1 if l == 0 else 2))
    assert np.allclose(lams, ref[:10], rtol=1e-12)
    assert [e.ordinal for e in entries][:3] == [1, 2, 4]


def test_assemble_interval_dirichlet():
    lams = bs.expand_ordinals(bs.assemble_spectrum(bs.ProblemSpec(1, 1, 1), 8), 8)
    assert np.allclose(lams, [(k * math.pi / 2) ** 2 for k in range(1, 9)], rtol=1e-12)


def test_assemble_clamped_disk_order():
    entries = bs.assemble_spectrum(bs.ProblemSpec(2, 2, 2), 5)
    assert entries[0].lam == pytest.approx(CLAMPED_DISK_LAM, rel=1e-11)
    assert entries[1].lam == pytest.approx(CLAMPED_DISK_ELL1, rel=1e-11)
    assert (entries[1].ell, entries[1].multiplicity) == (1, 2)
    lams = bs.expand_ordinals(entries)
    assert lams == sorted(lams)


def test_assemble_fixed_rho_max_too_small():
    with pytest.raises(PrecisionRangeError):
        bs.assemble_spectrum(bs.ProblemSpec(2, 1, 1), 50, rho_max=5.0)


def test_config_and_spec_validation():
    with pytest.raises(PrecisionRangeError):
        bs.ScanConfig(rho_max=60)
    with pytest.raises(DomainError):
        bs.ScanConfig(step=0.2)
    with pytest.raises(DomainError):
        bs.ScanConfig(root_tol=1e-8)
    with pytest.raises(DomainError):
        bs.ProblemSpec(2, 2, 3)
    with pytest.raises(DomainError):
        bs.ProblemSpec(0, 1, 1)
    with pytest.raises(DomainError):
        bs.assemble_spectrum(bs.ProblemSpec(2, 1, 1), 0)
