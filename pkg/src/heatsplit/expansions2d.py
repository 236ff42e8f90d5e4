"""Local-part expansions for the 2D Poisson equation.

All coefficients are functions of the scaled distance c = r / sqrt(eps) built
from G = exp(-c^2/4) and E = erfc(c/2); every routine accepts numpy arrays for
``c`` so many targets can be evaluated at once.

Conventions.  Kernels are the positive Green's function -(1/2pi) ln r; the
canonical double layer is D[mu] = int d/dnu_y G mu with nu outward, so that
D[1] = -1/2 on the inside.  ``convention="table"`` (default) returns the
published sign for the layer potentials, which is the negative of the
canonical one in 2D; ``"canonical"`` returns the values that enter Green's
identity u = V[-lap u] + S[du/dnu] - D[u].

Geometry is described by a :class:`~heatsplit.geometry.GeometryJet2D` (or any
object with ``kappa``, ``g3``, ``g4``) in the frame whose x2-axis is the
inward normal.  Layer densities are graph-coordinate derivatives
(sigma, sigma', sigma'', ...); volume densities map (m, n) -> d^m_1 d^n_2 f at
the target in the same frame.
"""
from dataclasses import dataclass
import math

import numpy as np

from .specfun import erfc, UnsupportedOrderError, SQRT_PI

SIGN_2D = {"table": {"slp": -1.0, "dlp": -1.0, "vol": 1.0},
           "canonical": {"slp": 1.0, "dlp": 1.0, "vol": 1.0}}


class UnsupportedConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class SplitParams:
    """Split parameter eps, truncation order P and target distance r."""
    eps: float
    P: int
    r: float = 0.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.P < 0:
            raise ValueError("P must be non-negative")
        if np.any(np.asarray(self.r) < 0):
            raise ValueError("r must be non-negative")

    @property
    def c(self):
        return np.asarray(self.r) / math.sqrt(self.eps)

    @property
    def sqrt_eps(self):
        return math.sqrt(self.eps)


def _ge(c):
    c = np.asarray(c, dtype=float)
    return c, np.exp(-c * c / 4.0), erfc(c / 2.0)


def _jet(seq, n):
    out = [0.0] * n
    for i, v in enumerate(list(seq)[:n]):
        out[i] = v
    return out


def _sign(convention, kind):
    try:
        return SIGN_2D[convention][kind]
    except KeyError:
        raise ValueError("unknown convention %r" % convention) from None


def _series(coefs, sp, first):
    total = 0.0
    for p, a in enumerate(coefs, start=first):
        if p > sp.P:
            break
        total = total + sp.eps ** (p / 2.0) * a
    return total


# ----------------------------------------------------------------------------
# half space
# ----------------------------------------------------------------------------
def half_space_coefficients(c):
    c, G, E = _ge(c)
    a0 = 0.5 * (2.0 - E + c * G / SQRT_PI - 0.5 * c * c * E)
    a1 = c ** 3 * E / 6.0 + (2.0 - c * c) * G / (3.0 * SQRT_PI)
    return a0, a1


def half_space_local(g_value, g_normal_deriv, r, eps):
    """Local part of a source g supported in the half plane x2 > 0, target (0, r).

    Returns eps*A0(c)*g + eps^(3/2)*A1(c)*dg/dx2 with the error O(eps^2).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    a0, a1 = half_space_coefficients(np.asarray(r) / math.sqrt(eps))
    return eps * a0 * g_value + eps ** 1.5 * a1 * g_normal_deriv


# ----------------------------------------------------------------------------
# single layer
# ----------------------------------------------------------------------------
def slp_coefficients_2d(sigma, geom, c):
    """Canonical A_1..A_4 (coefficient of eps^(p/2)) of the single layer."""
    s0, s1, s2 = _jet(sigma, 3)
    k, g3, g4 = geom.kappa, geom.g3, geom.g4
    c, G, E = _ge(c)
    sp_ = SQRT_PI
    a1 = s0 * (G / sp_ - 0.5 * c * E)
    a2 = s0 * (G * (0.5 * c * k / sp_) - E * (0.25 * c ** 2 * k))
    a3 = (s0 * (G * (k ** 2 * (4 * c ** 2 + 1) / (12 * sp_)) - E * (c ** 3 * k ** 2 / 6))
          + s2 * (G * (-(c ** 2 - 2) / (6 * sp_)) + E * (c ** 3 / 12)))
    a4 = (s0 * (G * (-c * (c ** 2 * g4 - 9 * c ** 2 * k ** 3 - 2 * g4 + 3 * k ** 3) / (24 * sp_))
                + E * (c ** 4 * (g4 - 9 * k ** 3) / 48))
          + s1 * (G * (-c * g3 * (c ** 2 - 2) / (6 * sp_)) + E * (c ** 4 * g3 / 12))
          + s2 * (G * (-c * k * (c ** 2 - 2) / (4 * sp_)) + E * (c ** 4 * k / 8)))
    return [a1, a2, a3, a4]


def slp_local_2d(sigma, geom, sp, convention="table"):
    """Single-layer local part sum_{p=1..P} eps^(p/2) A_p, error O(eps^((P+1)/2))."""
    if sp.P > 4:
        raise UnsupportedOrderError("2D single layer is tabulated through P = 4")
    return _sign(convention, "slp") * _series(slp_coefficients_2d(sigma, geom, sp.c), sp, 1)


# ----------------------------------------------------------------------------
# double layer
# ----------------------------------------------------------------------------
def dlp_coefficients_2d(mu, geom, c):
    """Canonical A_0..A_4 of the double layer (outward normal)."""
    m0, m1, m2, m3, m4 = _jet(mu, 5)
    k, g3, g4 = geom.kappa, geom.g3, geom.g4
    c, G, E = _ge(c)
    sp_ = SQRT_PI
    a0 = -0.5 * m0 * E
    a1 = -m0 * k * G / (2 * sp_)
    a2 = (-m0 * 3 * c * k ** 2 * G / (8 * sp_)
          + m2 * (-c * G / (2 * sp_) + c ** 2 * E / 4))
    a3 = (-m0 * (5 * c ** 2 * k ** 3 + 4 * g4 - 10 * k ** 3) * G / (16 * sp_)
          + m1 * (-g3 * (c ** 2 + 4) * G / (6 * sp_) + c ** 3 * g3 * E / 12)
          + m2 * (-k * (c ** 2 + 1) * G / (2 * sp_) + c ** 3 * k * E / 4))
    a4 = (-m0 * 5 * c * (21 * c ** 2 * k ** 4 + 32 * g3 ** 2 + 48 * g4 * k - 126 * k ** 4) * G / (384 * sp_)
          + m1 * (-5 * c * g3 * k * (c ** 2 + 4) * G / (12 * sp_) + 5 * c ** 4 * g3 * k * E / 24)
          + m2 * (-5 * c * k ** 2 * (c ** 2 + 1) * G / (8 * sp_) + 5 * c ** 4 * k ** 2 * E / 16)
          + m4 * (c * (c ** 2 - 2) * G / (24 * sp_) - c ** 4 * E / 48))
    return [a0, a1, a2, a3, a4]


def dlp_local_2d(mu, geom, sp, convention="table"):
    """Double-layer local part sum_{p=0..P} eps^(p/2) A_p."""
    if sp.P > 4:
        raise UnsupportedOrderError("2D double layer is tabulated through P = 4")
    return _sign(convention, "dlp") * _series(dlp_coefficients_2d(mu, geom, sp.c), sp, 0)


# ----------------------------------------------------------------------------
# volume
# ----------------------------------------------------------------------------
def vol_coefficients_2d(f, geom, c):
    """A_2..A_4 of the volume potential; ``f`` maps (m, n) to frame partials at the target."""
    g = lambda a: f.get(a, 0.0)
    f00, f01, f20, f02 = g((0, 0)), g((0, 1)), g((2, 0)), g((0, 2))
    k = geom.kappa
    c, G, E = _ge(c)
    sp_ = SQRT_PI
    a2 = f00 * (c * G / (2 * sp_) - (c ** 2 + 2) * E / 4 + 1.0)
    bnd = k * f00 - 2.0 * f01
    a3 = bnd * ((c ** 2 - 2) * G / (6 * sp_) - c ** 3 * E / 12)
    mix = 3 * k ** 2 * f00 - 4 * k * f01 + 3 * f02 - f20
    a4 = (c * (c ** 2 - 2) * G / (24 * sp_) * mix
          - (c ** 4 * mix + 12 * (f02 + f20)) * E / 48
          + 0.5 * (f02 + f20))
    return [a2, a3, a4]


def vol_local_2d(f, geom, sp, side=-1):
    """Volume-potential local part for an interior target, P in {2, 3, 4}."""
    if side is not None and side > 0:
        raise UnsupportedConfigurationError("volume expansion needs an interior target")
    if sp.P > 4:
        raise UnsupportedOrderError("2D volume potential is tabulated through P = 4")
    return _series(vol_coefficients_2d(f, geom, sp.c), sp, 2)


def coefficient_table_2d(kind, density, geom, c, convention="table"):
    """List of (p, A_p) for the CLI; A_p already carries the convention sign."""
    if kind == "slp":
        return [(p, _sign(convention, "slp") * a) for p, a in enumerate(slp_coefficients_2d(density, geom, c), 1)]
    if kind == "dlp":
        return [(p, _sign(convention, "dlp") * a) for p, a in enumerate(dlp_coefficients_2d(density, geom, c), 0)]
    if kind == "vol":
        return [(p, a) for p, a in enumerate(vol_coefficients_2d(density, geom, c), 2)]
    raise ValueError("unknown kind %r" % kind)
