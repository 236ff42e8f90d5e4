import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatsplit import geometry as geo
from heatsplit import taylor as T


def rotated(curve, angle, shift=(0.0, 0.0), reflect=False):
    # a reflected copy runs backwards so that it stays counterclockwise
    c, s = math.cos(angle), math.sin(angle)

    def f(t):
        x, y = curve.func(-t) if reflect else curve.func(t)
        if reflect:
            y = -y
        return shift[0] + c * x - s * y, shift[1] + s * x + c * y
    return geo.Curve2D(f, ccw=curve.ccw)


def test_circle_closest_point():
    circ = geo.circle()
    with pytest.raises(geo.AmbiguousProjectionError):
        geo.closest_point_curve(circ, [0.0, 0.0])
    s, b, r, side = geo.closest_point_curve(circ, [0.9, 0.0])
    np.testing.assert_allclose(b, [1.0, 0.0], atol=1e-14)
    assert r == pytest.approx(0.1, abs=1e-14)
    assert side == -1


def test_ellipse_closest_point_dense():
    ell = geo.ellipse(2.0, 1.0)
    x = np.array([0.0, 0.5])
    s, b, r, side = geo.closest_point_curve(ell, x)
    tang = ell.derivatives(s, 1)[1]
    assert abs(np.dot(x - b, tang)) <= 1e-10 * r * np.linalg.norm(tang)
    ss = np.arange(10 ** 6) / 10 ** 6
    p = ell(ss)
    dense = np.min(np.hypot(p[0] - x[0], p[1] - x[1]))
    assert r <= dense + 1e-14
    assert r == pytest.approx(dense, abs=1e-10)
    assert side == -1


def test_torus_closest_point():
    with pytest.raises(geo.AmbiguousProjectionError):
        geo.closest_point_torus(0.5, 0.3, [0.5, 0.0, 0.0])
    b, r, side, st_ = geo.closest_point_torus(0.5, 0.3, [0.75, 0.0, 0.0])
    np.testing.assert_allclose(b, [0.8, 0.0, 0.0], atol=1e-14)
    assert r == pytest.approx(0.05, abs=1e-14)
    assert side == -1


def test_torus_closest_point_beats_samples():
    rng = np.random.default_rng(3)
    surf = geo.torus()
    pts = surf(rng.random(10 ** 4), rng.random(10 ** 4))
    for _ in range(20):
        s, t = rng.random(2)
        b0, _, _, nout = surf.frame(s, t)
        x = b0 - 0.03 * rng.random() * nout
        b, r, side, st_ = geo.closest_point_surface(surf, x)
        assert r <= 0.03 + 1e-12
        assert np.linalg.norm(b - x) <= np.min(np.linalg.norm(pts.T - x, axis=1)) + 1e-14
        # b lies on the torus
        rxy = math.hypot(b[0], b[1])
        assert (rxy - 0.5) ** 2 + b[2] ** 2 == pytest.approx(0.09, abs=1e-12)


@pytest.mark.parametrize("s0", [0.0, 0.3, 0.71])
def test_circle_jet(s0):
    jet = geo.graph_jet_2d(geo.circle(), s0)
    assert jet.kappa == pytest.approx(1.0, abs=1e-12)
    assert jet.g3 == pytest.approx(0.0, abs=1e-11)
    assert jet.g4 == pytest.approx(3.0, abs=1e-10)


def test_flat_jet():
    line = geo.Curve2D(lambda s: (2.0 * s + 0.0 * s, 0.5 + 0.0 * s))
    jet = geo.graph_jet_2d(line, 0.2)
    assert (jet.kappa, jet.g3, jet.g4) == pytest.approx((0.0, 0.0, 0.0), abs=1e-14)


@pytest.mark.parametrize("s0", [0.0, 0.1, 0.37])
def test_ellipse_curvature(s0):
    ell = geo.ellipse(2.0, 1.0)
    d = ell.derivatives(s0, 2)
    ref = abs(d[1][0] * d[2][1] - d[1][1] * d[2][0]) / np.hypot(*d[1]) ** 3
    assert geo.graph_jet_2d(ell, s0).kappa == pytest.approx(ref, rel=1e-12)
    if s0 == 0.0:
        assert ref == pytest.approx(2.0, rel=1e-14)


def signed_curvature(curve, s):
    d = curve.derivatives(s, 2)
    speed = np.hypot(*d[1])
    k = (d[1][0] * d[2][1] - d[1][1] * d[2][0]) / speed ** 3
    return (k if curve.ccw else -k), speed


def test_graph_jet_matches_polynomial_fit():
    ell = geo.ellipse(2.0, 1.0)
    s0 = 0.1
    jet = geo.graph_jet_2d(ell, s0)
    ss = s0 + np.linspace(-0.01, 0.01, 401)
    p = ell(ss).T - jet.b
    x1, x2 = p @ jet.tangent, p @ jet.normal
    c = np.polynomial.polynomial.polyfit(x1, x2, 8)
    assert 2 * c[2] == pytest.approx(jet.kappa, abs=1e-7)
    # the fit loses g3 and g4 to rounding; differentiate the curvature along arc length instead:
    # at the frame origin g3 = dk/ds and g4 = d2k/ds2 + 3 k^3
    hs = 1e-3
    k = [signed_curvature(ell, s0 + j * hs)[0] for j in (-2, -1, 0, 1, 2)]
    speed = signed_curvature(ell, s0)[1]
    dk = (k[0] - 8 * k[1] + 8 * k[3] - k[4]) / (12 * hs)
    d2k = (-k[0] + 16 * k[1] - 30 * k[2] + 16 * k[3] - k[4]) / (12 * hs ** 2)
    v = [signed_curvature(ell, s0 + j * hs)[1] for j in (-2, -1, 1, 2)]
    dspeed = (v[0] - 8 * v[1] + 8 * v[2] - v[3]) / (12 * hs)
    g3 = dk / speed
    g4 = (d2k - dk * dspeed / speed) / speed ** 2 + 3 * k[2] ** 3
    assert jet.g3 == pytest.approx(g3, abs=1e-7)
    assert jet.g4 == pytest.approx(g4, abs=1e-7)


def test_rigid_motion_invariance_2d():
    curve = geo.trig_curve([(0.1, 0.0), (1.0, 0.2), (0.0, 0.1)], [(0.0, 0.0), (0.1, 0.9), (0.15, 0.0)])
    dens = lambda x, y: 1 + x * y + T.sin(x)
    x = np.array([0.6, 0.35])
    ang, shift = 0.7, np.array([0.3, -1.2])
    Rm = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    moved = rotated(curve, ang, shift)
    dens_moved = lambda X, Y: dens(math.cos(ang) * (X - shift[0]) + math.sin(ang) * (Y - shift[1]),
                                   -math.sin(ang) * (X - shift[0]) + math.cos(ang) * (Y - shift[1]))
    s1, _, r1, _ = geo.closest_point_curve(curve, x)
    s2, _, r2, _ = geo.closest_point_curve(moved, Rm @ x + shift)
    j1, j2 = geo.graph_jet_2d(curve, s1), geo.graph_jet_2d(moved, s2)
    assert r1 == pytest.approx(r2, abs=1e-12)
    assert (j1.kappa, j1.g3 ** 2, j1.g4) == pytest.approx((j2.kappa, j2.g3 ** 2, j2.g4), abs=1e-10)
    d1 = geo.density_jet_2d(curve, s1, dens)
    d2 = geo.density_jet_2d(moved, s2, dens_moved)
    np.testing.assert_allclose(d1, d2, atol=1e-11)


def test_reflection_flips_g3():
    curve = geo.trig_curve([(0.0, 0.0), (1.0, 0.0), (0.2, 0.0)], [(0.0, 0.0), (0.0, 0.8), (0.0, 0.1)])
    refl = rotated(curve, 0.0, reflect=True)
    j1 = geo.graph_jet_2d(curve, 0.13)
    j2 = geo.graph_jet_2d(refl, 1 - 0.13)
    assert abs(j1.g3) > 1e-3
    assert j2.kappa == pytest.approx(j1.kappa, rel=1e-12)
    assert j2.g3 == pytest.approx(-j1.g3, rel=1e-10)


def test_density_jets():
    circ = geo.circle()
    np.testing.assert_allclose(geo.density_jet_2d(circ, 0.2, lambda x, y: 2.5 + 0 * x), [2.5, 0, 0, 0, 0], atol=1e-14)
    small = geo.circle(1 / (2 * math.pi))  # unit speed
    d = geo.density_jet_2d(small, 0.0, lambda s: s, of="param")
    assert d[1] == pytest.approx(1.0, rel=1e-12)
    # x^2 y on the unit circle at (1, 0): along the graph this is x1 - x1^3
    d = geo.density_jet_2d(circ, 0.0, lambda x, y: x * x * y)
    np.testing.assert_allclose(d, [0, 1, 0, -6, 0], atol=1e-10)
    hstep = 1e-3
    g = lambda x1: (1 - (1 - math.sqrt(1 - x1 * x1))) ** 2 * x1
    fd3 = (g(2 * hstep) - 2 * g(hstep) + 2 * g(-hstep) - g(-2 * hstep)) / (2 * hstep ** 3)
    assert d[3] == pytest.approx(fd3, abs=1e-5)


def test_sphere_jet():
    jet = geo.graph_jet_3d(geo.sphere(2.0), 0.2, 0.4)
    assert (jet.kappa1, jet.kappa2) == pytest.approx((0.5, 0.5), abs=1e-12)
    assert jet.gH == pytest.approx(0.5, abs=1e-12)
    assert jet.gK == pytest.approx(0.25, abs=1e-12)


def test_torus_outer_equator_curvatures():
    jet = geo.graph_jet_3d(geo.torus(0.5, 0.3), 0.0, 0.0)
    assert jet.kappa1 == pytest.approx(10 / 3, rel=1e-12)
    assert jet.kappa2 == pytest.approx(1.25, rel=1e-12)


def test_plane_jet():
    plane = geo.Surface3D(lambda s, t: (s + 0 * t, t + 0 * s, 0 * s + 0 * t))
    jet = geo.graph_jet_3d(plane, 0.1, 0.2)
    assert (jet.kappa1, jet.kappa2) == pytest.approx((0.0, 0.0), abs=1e-14)
    assert all(abs(v) < 1e-13 for v in jet.gmn.values())


@given(st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=30, deadline=None)
def test_torus_frame_is_principal(s, t):
    surf = geo.torus()
    jet = geo.graph_jet_3d(surf, s, t)
    assert jet.gH ** 2 >= jet.gK - 1e-12
    # principal frame: the graph has no mixed second derivative
    _, e1, e2, n, gam, _, _, _ = geo._graph_map_3d(surf, s, t, 2)
    assert abs(gam.derivative((1, 1))) < 1e-10
    assert np.dot(e1, e2) == pytest.approx(0.0, abs=1e-13)
    # analytic principal curvatures of the torus (inward normal)
    th = 2 * math.pi * t
    k = sorted([1 / 0.3, math.cos(th) / (0.5 + 0.3 * math.cos(th))], reverse=True)
    assert sorted([jet.kappa1, jet.kappa2], reverse=True) == pytest.approx(k, abs=1e-10)


def test_surface_density_and_volume_jets():
    surf = geo.sphere()
    b, r, side, st_ = geo.closest_point_surface(surf, [0.0, 0.0, 0.9])
    d = geo.density_jet_3d(surf, *st_, lambda x, y, z: 3.0 + 0 * x)
    assert d[(0, 0)] == pytest.approx(3.0)
    assert all(abs(v) < 1e-12 for k, v in d.items() if k != (0, 0))
    f = geo.volume_jet_3d(lambda x, y, z: x * x + y * y + z * z, np.array([0.1, 0.2, 0.3]),
                          np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0]), 2)
    assert f[(0, 0, 0)] == pytest.approx(0.14)
    assert f[(2, 0, 0)] + f[(0, 2, 0)] + f[(0, 0, 2)] == pytest.approx(6.0)


@pytest.mark.parametrize("dom, inside, outside", [
    (geo.Disc(1.0), [0.2, 0.3], [1.1, 0.0]),
    (geo.Ball(1.0), [0.2, 0.3, 0.1], [0.0, 0.0, 1.01]),
    (geo.SolidTorus(0.5, 0.3), [0.6, 0.0, 0.1], [0.0, 0.0, 0.0]),
])
def test_domains(dom, inside, outside):
    assert dom.contains(np.array(inside))
    assert not dom.contains(np.array(outside))
    dirs = np.eye(dom.dim)
    ex = dom.ray_exit(np.array(inside, dtype=float), dirs)
    ends = np.array(inside) + ex[:, None] * dirs
    if dom.dim == 2:
        np.testing.assert_allclose(np.hypot(*ends.T), 1.0, atol=1e-12)
    elif isinstance(dom, geo.Ball):
        np.testing.assert_allclose(np.linalg.norm(ends, axis=1), 1.0, atol=1e-12)
    else:
        np.testing.assert_allclose(dom.level(ends), 0.0, atol=1e-10)
