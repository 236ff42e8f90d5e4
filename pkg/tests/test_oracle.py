import math

import numpy as np
import pytest

from heatsplit import checks as K
from heatsplit import coupled as C
from heatsplit import expansions2d as E2
from heatsplit import geometry as geo
from heatsplit import oracle as O

CIRCLE = geo.circle()
TORUS = geo.torus()


def test_zero_density():
    src = O.SourceDescriptor("single", CIRCLE, lambda x, y: 0.0 * x, 2)
    assert O.local_time_quadrature(src, K.target_near_2d(CIRCLE, 0.3, 0.02), 1e-3) == 0.0


@pytest.mark.parametrize("kind, geom, dens, dim", [
    ("single", CIRCLE, K.sigma_2d, 2),
    ("double", CIRCLE, K.mu_2d, 2),
    ("single", geo.sphere(), K.density_3d, 3),
    ("double", TORUS, K.density_3d, 3),
])
@pytest.mark.parametrize("r", [0.003, 0.03])
def test_closed_and_time_routes_agree(kind, geom, dens, dim, r):
    src = O.SourceDescriptor(kind, geom, dens, dim)
    x = K.target_near_3d(geom, (0.1, 0.3), r) if dim == 3 else K.target_near_2d(geom, 0.3, r)
    a = O.local_time_quadrature(src, x, 1e-3, route="closed")
    b = O.local_time_quadrature(src, x, 1e-3, route="time", tol=1e-9)
    assert a == pytest.approx(b, abs=1e-10)


def test_self_consistency():
    src = O.SourceDescriptor("double", CIRCLE, K.mu_2d, 2)
    x = K.target_near_2d(CIRCLE, 0.3, 0.01)
    v1, e1 = O.local_time_quadrature(src, x, 1e-3, route="time", return_error=True)
    v2 = O.local_time_quadrature(src, x, 1e-3, route="time", n=24)
    assert abs(v1 - v2) <= max(e1, 1e-15)


def test_unreachable_tolerance_raises():
    src = O.SourceDescriptor("double", CIRCLE, K.mu_2d, 2)
    x = K.target_near_2d(CIRCLE, 0.3, 0.003)
    with pytest.raises(O.AccuracyError) as info:
        O.local_time_quadrature(src, x, 1e-3, route="time", n=1)
    assert info.value.estimate > 0


def test_half_space_gaussian_remainder():
    # g = exp(-|x|^2) on x2 > 0: g(0) = 1, dg/dx2 = 0 at the boundary point
    errs = []
    for eps in (4e-3, 1e-3):
        r = 0.5 * math.sqrt(eps)
        ref = O.local_time_quadrature(O.SourceDescriptor("halfspace", extra={"r": r}), np.array([0.0, r]), eps)
        errs.append(abs(ref - E2.half_space_local(1.0, 0.0, r, eps)))
    assert 12 <= errs[0] / errs[1] <= 22


def test_volume_oracle_far_inside():
    # far from the boundary the local part of f is eps f + eps^2/2 lap f + O(eps^3)
    f = lambda x, y: 1 + x * x + 0.5 * y
    src = O.SourceDescriptor("volume", geo.Disc(), f, 2)
    eps = 1e-4
    x = np.array([0.1, 0.2])
    val = O.local_time_quadrature(src, x, eps)
    assert val == pytest.approx(eps * f(*x) + eps ** 2, abs=5 * eps ** 3)


# coupled
GAUSS = (lambda x, y: np.exp(-((x - 0.1) ** 2 + y ** 2) / 0.25), lambda x, y: 0.5 * np.exp(-((x + 0.2) ** 2 + (y - 0.1) ** 2) / 0.16))
GAUSS_HAT = [O.gaussian_fourier(1.0, 0.5, (0.1, 0.0)), O.gaussian_fourier(0.5, 0.4, (-0.2, 0.1))]
XC = np.array([0.15, -0.05])


def test_coupled_fourier_matches_heat_series_on_gaussians():
    eps = 1e-3
    four = O.coupled_local_fourier(GAUSS_HAT, K.DEFAULT_COUPLING, XC, eps, xi_max=30.0)
    heat = O.coupled_local_heat_series("volume", geo.Disc(), GAUSS, K.DEFAULT_COUPLING, XC, eps)
    np.testing.assert_allclose(four, heat, atol=1e-12)


def test_coupled_zero_sources():
    zero = [O.gaussian_fourier(0.0, 0.5, (0, 0))] * 2
    np.testing.assert_array_equal(O.coupled_local_fourier(zero, K.DEFAULT_COUPLING, XC, 1e-3, 30.0), [0.0, 0.0])


def test_coupled_constant_coupling_enters_at_second_order():
    coef = C.CouplingCoefficients((0, 0), (0, 0), 1.0, -1.0)
    only1 = [GAUSS_HAT[0], O.gaussian_fourier(0.0, 0.4, (0, 0))]
    u = [O.coupled_local_fourier(only1, coef, XC, eps, 30.0) for eps in (4e-3, 1e-3)]
    assert abs(u[0][1]) <= 10 * 4e-3 * abs(u[0][0])
    assert u[0][1] / u[1][1] == pytest.approx(16.0, rel=0.05)
    assert u[0][0] / u[1][0] == pytest.approx(4.0, rel=0.05)


def test_coupled_oracle_swap():
    coef = C.CouplingCoefficients((0.5, 0.2), (0.5, 0.2), 0.7, -0.7)
    a = O.coupled_local_fourier(GAUSS_HAT, coef, XC, 1e-3, 30.0)
    b = O.coupled_local_fourier(GAUSS_HAT[::-1], coef.swapped(), XC, 1e-3, 30.0)
    np.testing.assert_allclose(a, b[::-1], rtol=1e-12)


def test_coupled_oracle_tends_to_scalar_pair():
    eps = 1e-3
    scalar = np.array([O.local_time_quadrature(O.SourceDescriptor("volume", geo.Disc(), g, 2), XC, eps) for g in GAUSS])
    diffs = []
    for d in (0.2, 0.1):
        coef = C.CouplingCoefficients((0, 0), (0, 0), d, -d)
        v = O.coupled_local_heat_series("volume", geo.Disc(), GAUSS, coef, XC, eps)
        diffs.append(np.max(np.abs(v - scalar)))
    assert diffs[0] / diffs[1] == pytest.approx(2.0, rel=0.01)
    assert diffs[1] <= 0.1 * eps * np.max(np.abs(scalar))


def test_coupled_oracle_refuses_inadmissible():
    with pytest.raises(C.InadmissibleCoefficientsError):
        O.coupled_local_fourier(GAUSS_HAT, C.CouplingCoefficients((1, 0), (-1, 0), 1, 1), XC, 1e-3, 30.0)
