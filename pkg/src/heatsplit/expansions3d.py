"""Local-part expansions for the 3D Poisson equation.

Same conventions as :mod:`heatsplit.expansions2d`: positive kernel
1/(4 pi r), outward normal in the double layer (D[1] = -1/2 inside), frame
with x1, x2 along the principal directions and x3 along the inward normal.
In 3D the published signs coincide with the canonical ones, so there is no
convention switch.

Surface densities map (m, n) -> graph-coordinate partial d^m_1 d^n_2 sigma at
the closest point (principal frame); volume densities map (l, m, n) -> frame
partials of f at the target.
"""
import numpy as np

from .specfun import UnsupportedOrderError, SQRT_PI
from .expansions2d import SplitParams, UnsupportedConfigurationError, _ge, _series

__all__ = ["SplitParams", "slp_coefficients_3d", "slp_local_3d", "dlp_coefficients_3d", "dlp_local_3d",
           "vol_coefficients_3d", "vol_local_3d", "laplace_beltrami_sigma", "laplace_beltrami_mean_curvature"]


def _get(d, key):
    return d.get(key, 0.0)


def laplace_beltrami_sigma(jet):
    """Surface Laplacian of the density at the base point (principal frame)."""
    return _get(jet, (2, 0)) + _get(jet, (0, 2))


def laplace_beltrami_mean_curvature(geom):
    """Surface Laplacian of the mean curvature at the base point, from the graph jet."""
    k1, k2, g = geom.kappa1, geom.kappa2, geom.gmn
    lin = 0.5 * (g.get((4, 0), 0.0) + 2 * g.get((2, 2), 0.0) + g.get((0, 4), 0.0))
    return lin - 0.5 * (3 * k1 ** 3 + k1 ** 2 * k2 + k1 * k2 ** 2 + 3 * k2 ** 3)


def slp_coefficients_3d(sigma, geom, c):
    """A_1..A_3 (coefficient of eps^(p/2)) of the single layer."""
    s0 = _get(sigma, (0, 0))
    lap = laplace_beltrami_sigma(sigma)
    H, K = geom.gH, geom.gK
    c, G, E = _ge(c)
    a1 = s0 * (G / SQRT_PI - 0.5 * c * E)
    a2 = s0 * c * H * (G / SQRT_PI - 0.5 * c * E)
    a3 = (G * (((16 * c ** 2 + 4) * H ** 2 - (4 * c ** 2 + 4) * K) * s0 + (4 - 2 * c ** 2) * lap) / (12 * SQRT_PI)
          - c ** 3 * E * ((8 * H ** 2 - 2 * K) * s0 - lap) / 12)
    return [a1, a2, a3]


def slp_local_3d(sigma, geom, sp):
    if sp.P > 3:
        raise UnsupportedOrderError("3D single layer is available through P = 3")
    return _series(slp_coefficients_3d(sigma, geom, sp.c), sp, 1)


def dlp_coefficients_3d(mu, geom, c):
    """A_0..A_3 of the double layer."""
    m = lambda a, b: _get(mu, (a, b))
    g = lambda a, b: geom.gmn.get((a, b), 0.0)
    k1, k2 = geom.kappa1, geom.kappa2
    H, K = geom.gH, geom.gK
    lap = m(2, 0) + m(0, 2)
    c, G, E = _ge(c)
    a0 = -0.5 * E * m(0, 0)
    a1 = -H * G * m(0, 0) / SQRT_PI
    a2 = -c * G * ((3 * H ** 2 - K) * m(0, 0) + lap) / (2 * SQRT_PI) + c ** 2 * E * lap / 4
    glin = 0.5 * (g(4, 0) + 2 * g(2, 2) + g(0, 4))
    second = (k1 + 3 * k2) * m(0, 2) + (3 * k1 + k2) * m(2, 0)
    first = (g(0, 3) + g(2, 1)) * m(0, 1) + (g(1, 2) + g(3, 0)) * m(1, 0)
    a3 = (-G / (2 * SQRT_PI) * ((c ** 2 - 2) * H * (5 * H ** 2 - 3 * K) + glin) * m(0, 0)
          - (c ** 2 + 1) * G / (6 * SQRT_PI) * second
          - (c ** 2 + 4) * G / (6 * SQRT_PI) * first
          + c ** 3 * E / 12 * (second + first))
    return [a0, a1, a2, a3]


def dlp_local_3d(mu, geom, sp):
    if sp.P > 3:
        raise UnsupportedOrderError("3D double layer is available through P = 3")
    return _series(dlp_coefficients_3d(mu, geom, sp.c), sp, 0)


def vol_coefficients_3d(f, geom, c):
    """A_2..A_4 of the volume potential."""
    g = lambda a: f.get(a, 0.0)
    f0, fn = g((0, 0, 0)), g((0, 0, 1))
    ft = g((2, 0, 0)) + g((0, 2, 0))
    fnn = g((0, 0, 2))
    H, K = geom.gH, geom.gK
    c, G, E = _ge(c)
    a2 = f0 * (c * G / (2 * SQRT_PI) - (c ** 2 + 2) * E / 4 + 1.0)
    bnd = 2 * H * f0 - 2.0 * fn
    a3 = bnd * ((c ** 2 - 2) * G / (6 * SQRT_PI) - c ** 3 * E / 12)
    # 3 k1^2 + 2 k1 k2 + 3 k2^2 = 12 H^2 - 4 K
    mix = (12 * H ** 2 - 4 * K) * f0 - 8 * H * fn + 3 * fnn - ft
    a4 = (c * (c ** 2 - 2) * G / (24 * SQRT_PI) * mix
          - (c ** 4 * mix + 12 * (fnn + ft)) * E / 48
          + 0.5 * (fnn + ft))
    return [a2, a3, a4]


def vol_local_3d(f, geom, sp, side=-1):
    if side is not None and side > 0:
        raise UnsupportedConfigurationError("volume expansion needs an interior target")
    if sp.P > 4:
        raise UnsupportedOrderError("3D volume potential is available through P = 4")
    return _series(vol_coefficients_3d(f, geom, sp.c), sp, 2)


def coefficient_table_3d(kind, density, geom, c):
    fn = {"slp": (slp_coefficients_3d, 1), "dlp": (dlp_coefficients_3d, 0), "vol": (vol_coefficients_3d, 2)}
    if kind not in fn:
        raise ValueError("unknown kind %r" % kind)
    f, first = fn[kind]
    return list(enumerate(f(density, geom, c), first))
