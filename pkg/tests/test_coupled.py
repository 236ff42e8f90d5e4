import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import linalg

from heatsplit import checks as K
from heatsplit import coupled as C
from heatsplit import expansions2d as E2
from heatsplit import geometry as geo
from heatsplit.expansions2d import SplitParams
from heatsplit.specfun import UnsupportedOrderError, erfc

CC = C.CouplingCoefficients
ZERO = CC()
CIRCLE = geo.circle()
X = K.target_near_2d(CIRCLE, 0.7, 0.03)


def jets(kind, x=X):
    return K.coupled_jets(kind, CIRCLE, K.coupled_pair(), x)


def test_symbol_examples():
    np.testing.assert_array_equal(C.symbol_matrix(ZERO, [1.0, 0.0]), np.eye(2))
    M = C.symbol_matrix(CC((1, 2), (0, 0), 3, 0), [0.0, 1.0])
    assert M[0, 1] == 2j + 3
    coef = CC((1, 1), (1, 1), 1, -1)
    lp, lm = C.symbol_eigenvalues(coef, [1.0, 1.0])
    root = np.sqrt((2j + 1) * (2j - 1))
    assert lp == pytest.approx(2 + root) and lm == pytest.approx(2 - root)
    dense = np.sort_complex(np.linalg.eigvals(C.symbol_matrix(coef, [1.0, 1.0])))
    np.testing.assert_allclose(np.sort_complex(np.array([lp, lm])), dense, atol=1e-14)


def test_symbol_is_batched():
    xi = np.random.default_rng(0).normal(size=(4, 3, 2))
    M = C.symbol_matrix(K.DEFAULT_COUPLING, xi)
    assert M.shape == (4, 3, 2, 2)
    np.testing.assert_allclose(M[..., 0, 0], np.sum(xi ** 2, axis=-1))


def test_admissibility_examples():
    rep = C.ellipticity_check(CC((1, 1), (2, 2), 1, -1))
    assert rep.passed and rep.method == "analytic"
    rep = C.ellipticity_check(ZERO)
    assert not rep.passed and rep.offending_xi == (0.0, 0.0)
    rep = C.ellipticity_check(CC((0, 0), (0, 0), 1, -1))
    assert rep.passed
    lp, lm = C.symbol_eigenvalues(CC((0, 0), (0, 0), 1, -1), [0.3, 0.4])
    assert (lp, lm) == (pytest.approx(0.25 + 1j), pytest.approx(0.25 - 1j))


def test_admissibility_failure_reports_frequency():
    bad = CC((1, 0), (-1, 0), 1, 1)  # real off-diagonal product pushes lambda_- below zero
    rep = C.ellipticity_check(bad)
    assert not rep.passed and rep.method == "sampled, not proven"
    lp, lm = C.symbol_eigenvalues(bad, rep.offending_xi)
    assert min(lp.real, lm.real) <= 0
    with pytest.raises(C.InadmissibleCoefficientsError):
        C.coupled_slp_local(jets("single")[0], bad, SplitParams(1e-3, 2, 0.03))


def test_sampled_pass_is_labelled():
    coef = CC((1, 0), (0, 1), 1, -1)
    rep = C.ellipticity_check(coef)
    assert rep.method == "sampled, not proven"
    xi = np.random.default_rng(5).normal(size=(20000, 2)) * np.geomspace(1e-3, 1e3, 20000)[:, None]
    lp, lm = C.symbol_eigenvalues(coef, xi)
    assert rep.passed == bool(np.min(np.minimum(lp.real, lm.real)) > 0)


@pytest.mark.parametrize("seed", range(5))
def test_expm2_against_dense(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(50, 2, 2)) + 1j * rng.normal(size=(50, 2, 2))
    A[:5] = np.eye(2) * (0.3 + 0.1j) + 1e-9 * A[:5]  # nearly equal eigenvalues, Pade branch
    ref = np.array([linalg.expm(a) for a in A])
    np.testing.assert_allclose(C.expm2(A), ref, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(C.expm_pade(A), ref, rtol=1e-12, atol=1e-13)


def test_factorization_identity():
    rng = np.random.default_rng(11)
    err = max(K.factorization_error(K.random_admissible(rng), rng.normal(size=2), rng.uniform(0.01, 0.3))
              for _ in range(50))
    assert err <= 1e-12


@pytest.mark.parametrize("xi", [0.0, 0.5, 5.0, 50.0])
def test_closed_form_local_integral(xi):
    assert K.closed_form_integral_error(K.DEFAULT_COUPLING, (xi, 0.3 * xi), 1e-2) <= 1e-11


@pytest.mark.parametrize("kind", ["volume", "single", "double"])
def test_swap_symmetry(kind):
    j, r = jets(kind)
    P = max(K.ORDERS_COUPLED[kind])
    sp = SplitParams(1e-3, P, r)
    a = K.COUPLED_LOCAL[kind](j, K.DEFAULT_COUPLING, sp)
    b = K.COUPLED_LOCAL[kind](K.swapped_jets(j), K.DEFAULT_COUPLING.swapped(), sp)
    assert np.array_equal(a, b[::-1])


@pytest.mark.parametrize("c", [0.0, 0.7, 2.5])
def test_decoupled_limit(c):
    sp = SplitParams(1e-3, 4, c * math.sqrt(1e-3))
    for kind in ("single", "volume"):
        errs = K.decoupled_errors(jets(kind)[0], sp)
        for name in (("single", "double") if kind == "single" else ("volume",)):
            assert errs[name] <= 1e-13


def test_decoupled_local_values():
    j, r = jets("volume")
    sp = SplitParams(1e-3, 4, r)
    v = C.coupled_vol_local(j, ZERO, sp)
    assert v[0] == pytest.approx(E2.vol_local_2d(j.f1, j.geom, sp), rel=1e-13)
    assert v[1] == pytest.approx(E2.vol_local_2d(j.f2, j.geom, sp), rel=1e-13)


def test_volume_third_order_needs_normal_convection():
    coef = CC((0.4, 0.0), (0.8, 0.0), 0.5, -0.5)  # alpha2 = beta2 = 0 in a frame with tangent (1, 0)
    geom = geo.GeometryJet2D(b=np.zeros(2), r=0.0, side=-1, kappa=1.0, tangent=np.array([1.0, 0.0]),
                             normal=np.array([0.0, 1.0]))
    f1 = {(0, 0): 1.0, (0, 1): 0.3}
    A = C.coupled_vol_coefficients(C.CoupledJets(geom, f1=f1, f2={(0, 0): 2.0, (0, 1): -1.0}), coef, 0.8)[0]
    B = C.coupled_vol_coefficients(C.CoupledJets(geom, f1=f1, f2={(0, 0): -5.0, (1, 0): 3.0}), coef, 0.8)[0]
    assert A[1] == B[1]
    assert A[2] != B[2]


def test_slp_second_order_coupling_through_normal_component():
    coef = CC((0.4, 0.0), (0.8, 0.0), 0.5, -0.5)  # a2 = b2 = 0
    geom = geo.GeometryJet2D(b=np.zeros(2), r=0.0, side=-1, kappa=1.0, g3=0.2, g4=3.0,
                             tangent=np.array([1.0, 0.0]), normal=np.array([0.0, 1.0]))
    sp = SplitParams(1e-3, 2, 0.02)
    for s2 in ((0.0, 0.0, 0.0), (2.0, -1.0, 0.5)):
        j = C.CoupledJets(geom, sigma1=(1.0, 0.3, -0.2), sigma2=s2)
        v = C.coupled_slp_local(j, coef, sp)
        assert v[0] == pytest.approx(E2.slp_local_2d(j.sigma1, geom, sp, "canonical"), rel=1e-14)
    # with a2 != 0 the second component enters at this order
    coef = CC((0.4, 0.3), (0.8, 0.6), 0.5, -0.5)
    v1 = C.coupled_slp_local(C.CoupledJets(geom, sigma1=(1.0,), sigma2=(0.0,)), coef, sp)
    v2 = C.coupled_slp_local(C.CoupledJets(geom, sigma1=(1.0,), sigma2=(1.0,)), coef, sp)
    assert v1[0] != v2[0]


@given(st.floats(0, 6), st.integers(0, 3), st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=30, deadline=None)
def test_dlp_flat_constant(c, P, m1, m2):
    flat = geo.GeometryJet2D(b=np.zeros(2), r=0.0, side=-1)
    sp = SplitParams(1e-3, P, c * math.sqrt(1e-3))
    v = C.coupled_dlp_local(C.CoupledJets(flat, mu1=(m1,), mu2=(m2,)), ZERO, sp)
    np.testing.assert_allclose(v, [0.5 * m1 * erfc(c / 2), 0.5 * m2 * erfc(c / 2)], rtol=1e-14, atol=1e-300)


def test_dlp_second_component_vanishes():
    j, r = jets("double")
    j = C.CoupledJets(j.geom, mu1=j.mu1, mu2=(0.0, 0.0, 0.0))
    coef = CC((0.3, 0.7), (0.0, 0.0), 0.5, 0.0)
    v = C.coupled_dlp_local(j, coef, SplitParams(1e-3, 3, r))
    assert v[1] == 0.0 and v[0] != 0.0


def test_dlp_imaginary_residual():
    j, r = jets("double")
    val, resid = C.coupled_dlp_local(j, K.DEFAULT_COUPLING, SplitParams(1e-3, 3, r), report=True)
    assert resid == 0.0
    canon = C.coupled_dlp_local(j, K.DEFAULT_COUPLING, SplitParams(1e-3, 3, r), convention="canonical")
    np.testing.assert_array_equal(canon, -val)
    bad = C.CoupledJets(j.geom, mu1=(1j, 0.0, 0.0), mu2=j.mu2)
    with pytest.raises(C.IntegrityError):
        C.coupled_dlp_local(bad, K.DEFAULT_COUPLING, SplitParams(1e-3, 3, r))


@pytest.mark.parametrize("kind, cap", [("volume", 4), ("single", 4), ("double", 3)])
def test_order_caps(kind, cap):
    j, r = jets(kind)
    with pytest.raises(UnsupportedOrderError):
        K.COUPLED_LOCAL[kind](j, K.DEFAULT_COUPLING, SplitParams(1e-3, cap + 1, r))


def test_history_symbol_inverts():
    xi = np.array([[0.3, -0.2], [2.0, 1.0]])
    H = C.history_symbol(K.DEFAULT_COUPLING, xi, 1e-2)
    M = C.symbol_matrix(K.DEFAULT_COUPLING, xi)
    np.testing.assert_allclose(M @ H, np.array([linalg.expm(-m * 1e-2) for m in M]), atol=1e-13)
