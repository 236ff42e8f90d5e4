"""History (long-time) part of the potentials.

For the scalar Poisson problems the history part is the potential of the
smoothed kernel G_H = G - G_L, which is available in closed form:

    3D  G_H(r) = erf(r / 2 sqrt(eps)) / (4 pi r)
    2D  G_H(r) = -(1/2pi) ln r - E1(r^2 / 4 eps) / (4 pi)

It is smooth on the scale sqrt(eps), so tensor-product rules fitted to the
geometry (trapezoidal in periodic directions, Gauss-Legendre panels otherwise)
converge spectrally once their spacing is below that scale.

For the coupled system no Green's function is available and the history part
is the Fourier integral of M^{-1} e^{-M eps} F^.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import geometry as geo
from .coupled import history_symbol, require_admissible, symbol_matrix, expm2
from .oracle import AccuracyError, SourceDescriptor, gauss_legendre, _polar_fourier
from .specfun import EULER_GAMMA, SQRT_PI, erf, exp_integral_e1

__all__ = ["smoothed_kernel", "exact_kernel", "QuadratureNodes", "boundary_nodes", "volume_nodes",
           "history_sum", "history_potential_poisson", "coupled_history_fourier", "SourceDescriptor"]

_SERIES_CUT = 1e-6


# ----------------------------------------------------------------------------
# kernels
# ----------------------------------------------------------------------------
def _ein(x):
    """Ein(x) = E1(x) + gamma + ln x, entire; power series below 1."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 1.0
    xs = x[small]
    term = xs.copy()
    acc = xs.copy()
    for k in range(2, 24):
        term = -term * xs * (k - 1) / (k * k)
        acc = acc + term
    out[small] = acc
    xl = x[~small]
    out[~small] = exp_integral_e1(xl) + EULER_GAMMA + np.log(xl)
    return out


def _dipole3_scaled(x):
    # erf(x)/x^3 - 2 exp(-x^2)/(sqrt(pi) x^2); series below 1/2
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 0.5
    xs2 = x[small] ** 2
    acc = np.zeros_like(xs2)
    p = np.ones_like(xs2)
    for n in range(1, 16):
        acc = acc + (-1) ** (n + 1) * 2 * n * p / (math.factorial(n) * (2 * n + 1))
        p = p * xs2
    out[small] = 2.0 / SQRT_PI * acc
    xl = x[~small]
    out[~small] = erf(xl) / xl ** 3 - 2.0 * np.exp(-xl * xl) / (SQRT_PI * xl * xl)
    return out


def smoothed_kernel(dim, eps, variant, r):
    """History kernel G_H(r) (``"single"``) or its dipole radial factor g(r).

    The dipole kernel is d/dnu_y G_H(|x - y|) = g(|x - y|) (x - y).nu, that is
    g = -G_H'(r) / r.  All removable singularities at r = 0 are handled.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    if np.any(r < 0):
        raise ValueError("r must be non-negative")
    se = math.sqrt(eps)
    if dim == 3 and variant == "single":
        x = r / (2 * se)
        out = np.empty_like(r)
        small = x < _SERIES_CUT
        out[small] = (1.0 - x[small] ** 2 / 3.0) / (4 * math.pi ** 1.5 * se)
        out[~small] = erf(x[~small]) / (4 * math.pi * r[~small])
    elif dim == 2 and variant == "single":
        out = (EULER_GAMMA - math.log(4 * eps) - _ein(r * r / (4 * eps))) / (4 * math.pi)
    elif dim == 2 and variant == "dipole":
        q = r * r / (4 * eps)
        out = np.empty_like(r)
        small = q < 1e-12
        out[small] = (1.0 - 0.5 * q[small]) / (8 * math.pi * eps)
        out[~small] = -np.expm1(-q[~small]) / (q[~small] * 8 * math.pi * eps)
    elif dim == 3 and variant == "dipole":
        out = _dipole3_scaled(r / (2 * se)) / (32 * math.pi * se ** 3)
    else:
        raise ValueError("unknown kernel %r/%r" % (dim, variant))
    return float(out[0]) if scalar else out


def exact_kernel(dim, variant, r):
    """Free-space Green's function (single) or its dipole radial factor."""
    r = np.asarray(r, dtype=float)
    if dim == 2:
        return -np.log(r) / (2 * math.pi) if variant == "single" else 1.0 / (2 * math.pi * r * r)
    return 1.0 / (4 * math.pi * r) if variant == "single" else 1.0 / (4 * math.pi * r ** 3)


# ----------------------------------------------------------------------------
# geometry-fitted quadrature
# ----------------------------------------------------------------------------
@dataclass
class QuadratureNodes:
    points: np.ndarray   # (N, dim)
    weights: np.ndarray  # (N,)
    normals: np.ndarray = None  # (N, dim) outward, boundary rules only

    def __len__(self):
        return len(self.weights)


def _gl_panels(a, b, n, order=8):
    npan = max(1, math.ceil(n / order))
    x, w = gauss_legendre(order)
    br = np.linspace(a, b, npan + 1)
    mid, half = 0.5 * (br[1:] + br[:-1]), 0.5 * np.diff(br)
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _trap(n):
    n = max(int(n), 4)
    return np.arange(n) / n, np.full(n, 1.0 / n)


def _surface_eval(func, s, t):
    from .taylor import TPS
    S = TPS.variable(0, s, 2, 1)
    Tt = TPS.variable(1, t, 2, 1)
    P = func(S, Tt)
    p = np.array([c.value for c in P])
    nrm = np.cross(np.array([c[(1, 0)] for c in P]), np.array([c[(0, 1)] for c in P]), axis=0)
    jac = np.linalg.norm(nrm, axis=0)
    return p, nrm / jac, jac


def boundary_nodes(geometry, h, order=8):
    """Boundary rule with spacing about h.

    Curves: trapezoidal in the periodic parameter.  Surfaces (parameters in
    [0, 1)^2): trapezoidal in s, Gauss-Legendre panels in t.
    """
    if isinstance(geometry, geo.Curve2D):
        s = np.linspace(0, 1, 256, endpoint=False)
        _, sp = geometry.normals(s)
        n = max(16, math.ceil(np.mean(sp) / h))
        s, w = _trap(n)
        p = np.asarray(geometry(s))
        nu, sp = geometry.normals(s)
        return QuadratureNodes(p.T.copy(), w * sp, np.asarray(nu).T.copy())
    if isinstance(geometry, geo.Surface3D):
        sg, tg = np.meshgrid(np.linspace(0, 1, 32, endpoint=False), np.linspace(0.01, 0.99, 32), indexing="ij")
        func = geometry.func
        from .taylor import TPS
        P = func(TPS.variable(0, sg.ravel(), 2, 1), TPS.variable(1, tg.ravel(), 2, 1))
        ls = np.mean(np.linalg.norm([c[(1, 0)] for c in P], axis=0))
        lt = np.mean(np.linalg.norm([c[(0, 1)] for c in P], axis=0))
        s, ws = _trap(math.ceil(ls / h))
        t, wt = _gl_panels(0.0, 1.0, math.ceil(lt / h), order)
        S, Tt = np.meshgrid(s, t, indexing="ij")
        p, nu, jac = _surface_eval(func, S.ravel(), Tt.ravel())
        return QuadratureNodes(p.T.copy(), np.outer(ws, wt).ravel() * jac, nu.T.copy())
    raise TypeError("unsupported boundary %r" % type(geometry).__name__)


def volume_nodes(domain, h, order=8):
    """Volume rule with spacing about h: Gauss-Legendre radially, trapezoidal in angles."""
    tau = 2 * math.pi
    if isinstance(domain, geo.Disc):
        R = domain.radius
        r, wr = _gl_panels(0.0, R, math.ceil(R / h), order)
        th, wth = _trap(math.ceil(tau * R / h))
        Rr, TH = np.meshgrid(r, tau * th, indexing="ij")
        p = domain.center + np.stack([Rr * np.cos(TH), Rr * np.sin(TH)], axis=-1).reshape(-1, 2)
        return QuadratureNodes(p, (np.outer(wr * r, tau * wth)).ravel())
    if isinstance(domain, geo.Ball):
        R = domain.radius
        r, wr = _gl_panels(0.0, R, math.ceil(R / h), order)
        th, wth = _gl_panels(0.0, math.pi, math.ceil(math.pi * R / h), order)
        ph, wph = _trap(math.ceil(tau * R / h))
        Rr, TH, PH = np.meshgrid(r, th, tau * ph, indexing="ij")
        st = np.sin(TH)
        p = domain.center + np.stack([Rr * st * np.cos(PH), Rr * st * np.sin(PH), Rr * np.cos(TH)],
                                     axis=-1).reshape(-1, 3)
        w = (wr * r * r)[:, None, None] * (wth * np.sin(th))[None, :, None] * (tau * wph)[None, None, :]
        return QuadratureNodes(p, w.ravel())
    if isinstance(domain, geo.SolidTorus):
        R, rho = domain.R, domain.rho
        a, wa = _gl_panels(0.0, rho, math.ceil(rho / h), order)
        th, wth = _trap(math.ceil(tau * rho / h))
        ph, wph = _trap(math.ceil(tau * R / h))
        A, TH, PH = np.meshgrid(a, tau * th, tau * ph, indexing="ij")
        q = R + A * np.cos(TH)
        p = np.stack([q * np.cos(PH), q * np.sin(PH), A * np.sin(TH)], axis=-1).reshape(-1, 3)
        w = (wa * a)[:, None, None] * (tau * wth)[None, :, None] * (tau * wph)[None, None, :] * q
        return QuadratureNodes(p, w.ravel())
    raise TypeError("unsupported domain %r" % type(domain).__name__)


# ----------------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------------
def history_sum(dim, variant, nodes, values, targets, eps, block=2_000_000):
    """sum_j w_j v_j K_H(x_i, y_j) for every target, dense and blocked over nodes."""
    X = np.atleast_2d(np.asarray(targets, dtype=float))
    P = nodes.points
    wv = nodes.weights * np.asarray(values, dtype=float) * np.ones(len(nodes))
    out = np.zeros(len(X))
    nb = max(1, block // len(X))
    for j0 in range(0, len(P), nb):
        j1 = min(j0 + nb, len(P))
        D = [X[:, k:k + 1] - P[None, j0:j1, k] for k in range(dim)]
        r = np.sqrt(sum(d * d for d in D))
        K = smoothed_kernel(dim, eps, variant, r)
        if variant == "dipole":
            K *= sum(D[k] * nodes.normals[None, j0:j1, k] for k in range(dim))
        out += K @ wv[j0:j1]
    return out


def _nodes_for(src, h):
    if src.kind == "volume":
        return volume_nodes(src.geometry, h)
    return boundary_nodes(src.geometry, h)


def _density_at(src, nodes):
    return np.asarray(src.density(*nodes.points.T), dtype=float) * np.ones(len(nodes))


def history_potential_poisson(src, target, eps, h=None, tol=1e-10, max_nodes=2 ** 22, return_error=False):
    """History part (canonical sign) of a scalar Poisson potential at one or more targets.

    ``src.kind`` is "volume" (Disc, Ball, SolidTorus), "single" or "double"
    (Curve2D or Surface3D).  The node spacing starts at ``h`` (default
    sqrt(eps)) and is refined so that the node count doubles until two levels
    agree to ``tol`` relative to max(1, |value|).
    """
    if src.kind not in ("volume", "single", "double"):
        raise ValueError("unknown source kind %r" % src.kind)
    variant = "dipole" if src.kind == "double" else "single"
    pdim = src.dim if src.kind == "volume" else src.dim - 1
    h = math.sqrt(eps) if h is None else h

    def run(hh):
        nodes = _nodes_for(src, hh)
        return history_sum(src.dim, variant, nodes, _density_at(src, nodes), target, eps), len(nodes)

    prev, n = run(h)
    while True:
        h /= 2.0 ** (1.0 / pdim)
        if len(_nodes_for(src, h)) > max_nodes:
            raise AccuracyError("history quadrature hit the node cap", None)
        cur, n = run(h)
        err = float(np.max(np.abs(cur - prev)))
        if err <= tol * max(1.0, float(np.max(np.abs(cur)))):
            break
        prev = cur
    val = float(cur[0]) if np.ndim(target) == 1 else cur
    return (val, err) if return_error else val


# ----------------------------------------------------------------------------
# coupled history in Fourier space
# ----------------------------------------------------------------------------
def _history_radius(coef, eps, level=1e-16, nang=64):
    th = 2 * math.pi * np.arange(nang) / nang
    dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    k = math.sqrt(-math.log(level) / eps)
    for _ in range(200):
        E = expm2(-symbol_matrix(coef, k * dirs) * eps)
        if float(np.max(np.linalg.norm(E, ord=2, axis=(-2, -1)))) < level:
            return k
        k *= 1.1
    raise AccuracyError("no truncation radius found for the history integral", None)


def coupled_history_fourier(fhats, coef, target, eps, xi_max=None, nrad=256, nang=128, tol=1e-8,
                            return_error=False):
    """(2 pi)^-2 int M^-1 e^{-M eps} F^ e^{i xi.x} d xi on a polar grid.

    ``fhats`` are the two source transforms (see ``oracle.quadrature_fourier``
    and ``oracle.gaussian_fourier``).  Refuses coefficients for which M(0) is
    singular.  The truncation radius makes ||e^{-M eps}|| < 1e-16 at the edge.
    """
    require_admissible(coef, require_invertible=True)
    if xi_max is None:
        xi_max = _history_radius(coef, eps)
    fn = lambda xi: history_symbol(coef, xi, eps)
    v1 = _polar_fourier(fn, fhats, target, xi_max, nrad, nang)
    v2 = _polar_fourier(fn, fhats, target, xi_max, 2 * nrad, 2 * nang)
    scale = max(float(np.max(np.abs(v2))), 1e-300)
    if float(np.max(np.abs(v2.imag))) > tol * scale:
        raise AccuracyError("Fourier history not real", float(np.max(np.abs(v2.imag))))
    err = float(np.max(np.abs(v1.real - v2.real)))
    if err > tol * scale:
        raise AccuracyError("Fourier history grid under-resolved (%.3e)" % err, err)
    return (v2.real, err) if return_error else v2.real
