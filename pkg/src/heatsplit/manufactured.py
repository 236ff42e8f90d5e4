"""Manufactured solutions with derived data by series propagation.

A field is any function of (x, y, z) written with the ``taylor`` dispatchers,
so it accepts floats, arrays and TPS arguments.  Source term -lap u and the
normal derivative are obtained by expanding u about the evaluation point to
two (one) extra orders and differentiating the series; when the arguments are
themselves series (jets along a chart or a frame) the result is composed back,
so every derived field is again a TPS-compatible function.
"""
import numpy as np

from . import taylor as T
from .taylor import TPS


def torus_solution(x, y, z):
    """Default manufactured solution of the torus experiment."""
    X, Y, Z = x + 2, y + 2, z + 1
    return (T.exp(X + 2 * Y + 3 * Z) + T.sin(X * X * Y - Y * Z * Z + Z)
            + X * Y * Y * Z * Z * Z - T.cos(X * Y * Z))


def constant_solution(x, y, z):
    return 1.0 + 0.0 * x


def disc_solution(x, y):
    """Smooth non-harmonic field for the planar experiment."""
    return T.exp(x + 2 * y) + T.sin(3 * x * y + y) + x * x * x * y * y - T.cos(x - y * y)


def _expand(func, args, extra):
    """func about the value point of args as a series of order (args order) + extra."""
    if isinstance(args[0], TPS):
        base, order = [a.value for a in args], args[0].order
    else:
        base, order = [np.asarray(a, dtype=float) for a in args], 0
    b = np.broadcast_arrays(*base)
    U = func(*TPS.variables(b, order + extra))
    if not isinstance(U, TPS):
        U = TPS.constant(np.asarray(U, dtype=float) * np.ones(b[0].shape), len(args), order + extra)
    return U, order


def _finish(S, args):
    if isinstance(args[0], TPS):
        return S.compose(list(args))
    return S.value


class ManufacturedSolution:
    """u together with -lap u, grad u and normal-derivative fields."""

    def __init__(self, func=torus_solution, name="torus", dim=3):
        self.func = func
        self.name = name
        self.dim = dim

    def __call__(self, *x):
        return self.func(*x)

    def source(self, *x):
        """f = -lap u."""
        U, _ = _expand(self.func, x, 2)
        L = sum(U.partial(k).partial(k) for k in range(self.dim))
        return _finish(-L, x)

    def gradient(self, *x):
        U, _ = _expand(self.func, x, 1)
        return [_finish(U.partial(k), x) for k in range(self.dim)]

    def normal_derivative(self, normal_field):
        """d u / d nu for a TPS-compatible outward normal field nu(*x)."""
        def dudn(*x):
            g = self.gradient(*x)
            n = normal_field(*x)
            return sum(gk * nk for gk, nk in zip(g, n))
        return dudn

    def values(self, points):
        p = np.asarray(points, dtype=float)
        return np.asarray(self.func(*p.T), dtype=float) * np.ones(len(p))


def torus_normal_field(R, rho):
    """Outward unit normal of the torus as a field on its surface points."""
    def nu(x, y, z):
        q = T.sqrt(x * x + y * y)
        f = (1.0 - R / q) / rho
        return x * f, y * f, z / rho
    return nu


def circle_normal_field(radius, center=(0.0, 0.0)):
    def nu(x, y):
        return (x - center[0]) / radius, (y - center[1]) / radius
    return nu


# name -> (field, dimension)
SOLUTIONS = {"torus": (torus_solution, 3), "constant": (constant_solution, 3), "disc": (disc_solution, 2)}
