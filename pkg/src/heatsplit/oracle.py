"""Brute-force reference values for the local parts.

Scalar local parts are u_L(x) = int_0^eps int K_t(x - y) F(y) dy dt with the
heat kernel K_t = (4 pi t)^(-d/2) exp(-|x - y|^2 / 4t).  Two routes are
available for layer potentials:

* ``"closed"``: the time integral is done analytically, leaving a spatial
  quadrature of the residual kernel (E1 in 2D, erfc in 3D);
* ``"time"``: nested quadrature, outer in z = sqrt(t), inner in space.

Spatial quadrature uses composite Gauss-Legendre panels graded toward the
closest boundary point (layers) or toward the target along rays (volumes).
Every value is recomputed with more nodes per panel and the difference is
returned as the error estimate.

The coupled oracle evaluates e^{-M t} = e^{t lap} sum_k (-t)^k N(grad)^k / k!
in physical space (Hermite derivatives of the Gaussian); a polar Fourier
quadrature of M^{-1}(I - e^{-M eps}) F^ serves smooth sources and the history
part.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy import integrate

from .specfun import erfc, exp_integral_e1, SQRT_PI
from . import geometry as geo
from .coupled import local_symbol_integral, history_symbol, require_admissible

U_CUT = 7.0  # exp(-U_CUT^2) ~ 5e-22: Gaussian factors beyond 2 U_CUT sqrt(eps) are dropped


class AccuracyError(ArithmeticError):
    def __init__(self, msg, estimate=None):
        super().__init__(msg)
        self.estimate = estimate


# ----------------------------------------------------------------------------
# residual kernels: int_0^eps of the heat kernel (single) or of its
# d/dnu_y derivative divided by (x - y).nu (dipole)
# ----------------------------------------------------------------------------
def residual_kernel(dim, variant, rho, eps):
    """Closed-form local (residual) kernel.

    single: 2D E1(rho^2/4eps)/(4pi), 3D erfc(rho/2sqrt(eps))/(4pi rho);
    dipole: radial factor g with kernel (x - y).nu * g(rho):
    2D exp(-rho^2/4eps)/(2pi rho^2), 3D erfc/(4pi rho^3) + exp/(4 pi^1.5 sqrt(eps) rho^2).
    """
    rho = np.asarray(rho, dtype=float)
    se = math.sqrt(eps)
    if dim == 2 and variant == "single":
        return exp_integral_e1(rho * rho / (4 * eps)) / (4 * math.pi)
    if dim == 3 and variant == "single":
        return erfc(rho / (2 * se)) / (4 * math.pi * rho)
    if dim == 2 and variant == "dipole":
        return np.exp(-rho * rho / (4 * eps)) / (2 * math.pi * rho * rho)
    if dim == 3 and variant == "dipole":
        return (erfc(rho / (2 * se)) / (4 * math.pi * rho ** 3)
                + np.exp(-rho * rho / (4 * eps)) / (4 * math.pi ** 1.5 * se * rho * rho))
    raise ValueError("unknown kernel %r/%r" % (dim, variant))


def heat_kernel(dim, variant, rho2, t):
    """Heat kernel (single) or its dipole radial factor 1/(2t) * K_t, as functions of rho^2."""
    k = (4 * math.pi * t) ** (-dim / 2.0) * np.exp(-rho2 / (4 * t))
    return k if variant == "single" else k / (2 * t)


# ----------------------------------------------------------------------------
# quadrature helpers
# ----------------------------------------------------------------------------
@lru_cache(maxsize=None)
def gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def composite(breaks, n):
    """Composite n-point Gauss-Legendre rule on consecutive breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(n)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def graded_breaks(left, right, hmin, hmax, ratio=2.0):
    """Breakpoints on [-left, right] geometrically graded toward 0."""
    def side(L):
        pts = [0.0]
        h = min(hmin, L)
        while pts[-1] + h < L:
            pts.append(pts[-1] + h)
            h = min(h * ratio, hmax)
        if L - pts[-1] < 0.3 * h and len(pts) > 1:
            pts[-1] = L
        else:
            pts.append(L)
        return np.array(pts)
    lo = side(left)
    hi = side(right)
    return np.concatenate([-lo[::-1], hi[1:]])


def _check(v1, v2, tol, scale):
    err = float(np.max(np.abs(np.asarray(v1) - np.asarray(v2))))
    if err > tol * max(float(np.max(np.abs(v2))), scale):
        raise AccuracyError("oracle tolerance %.1e not met (estimate %.3e)" % (tol, err), err)
    return err


# ----------------------------------------------------------------------------
# source descriptor
# ----------------------------------------------------------------------------
@dataclass
class SourceDescriptor:
    """kind in {"volume", "single", "double", "halfspace"}; ``geometry`` is a
    Curve2D / Surface3D (layers) or Disc / Ball / SolidTorus (volume);
    ``density`` is a callable of the Cartesian coordinates."""
    kind: str
    geometry: object = None
    density: object = None
    dim: int = 2
    extra: dict = field(default_factory=dict)


# ----------------------------------------------------------------------------
# 2D layers
# ----------------------------------------------------------------------------
def _curve_nodes(curve, s_star, r, eps, n):
    _, speed = curve.normals(np.array([s_star]))
    sp0 = float(speed[0])
    s = np.linspace(0, 1, 512, endpoint=False)
    _, sp_all = curve.normals(s)
    se = math.sqrt(eps)
    hmin = max(min(r, se), 1e-3 * se) / (2 * np.max(sp_all))
    hmax = se / np.max(sp_all)
    br = graded_breaks(0.5, 0.5, hmin, hmax) + s_star
    return composite(br, n)


def _curve_layer(curve, density, x, eps, variant, n, route, s_star, r, nz=None):
    s, w = _curve_nodes(curve, s_star, r, eps, n)
    p = curve(s)
    nu, speed = curve.normals(s)
    d = np.asarray(x)[:, None] - p
    rho2 = np.sum(d * d, axis=0)
    dens = np.asarray(density(p[0], p[1]), dtype=float) * np.ones_like(s)
    wt = w * speed * dens
    if variant == "dipole":
        wt = wt * np.sum(d * nu, axis=0)
    if route == "closed":
        return float(np.sum(wt * residual_kernel(2, variant, np.sqrt(rho2), eps)))
    return _time_route(2, variant, rho2, wt, eps, nz or n)


def _time_route(dim, variant, rho2, wt, eps, n, r=None):
    # z = sqrt(t); the integrand varies on the scale of the target distance near z = 0
    se = math.sqrt(eps)
    r = math.sqrt(float(np.min(rho2))) if r is None else r
    hmin = min(max(r, 1e-3 * se) / 8, se / 8)
    br = graded_breaks(0.0, se, hmin, se / 8)[1:]
    z, wz = composite(br, n)
    total = 0.0
    for zi, wi in zip(z, wz):
        t = zi * zi
        total += wi * 2 * zi * np.sum(wt * heat_kernel(dim, variant, rho2, t))
    return float(total)


# ----------------------------------------------------------------------------
# 3D layers
# ----------------------------------------------------------------------------
def _surface_closest(surface, x):
    b, r, side, (s, t) = geo.closest_point_surface(surface, x)
    return b, r, (s, t)


def _chart_eval(func, u, v):
    from .taylor import TPS
    U = TPS.variable(0, u, 2, 1)
    V = TPS.variable(1, v, 2, 1)
    P = func(U, V)
    p = np.array([c.value for c in P])
    pu = np.array([c[(1, 0)] for c in P])
    pv = np.array([c[(0, 1)] for c in P])
    nrm = np.cross(pu, pv, axis=0)
    jac = np.linalg.norm(nrm, axis=0)
    return p, nrm / jac, jac, np.linalg.norm(pu, axis=0), np.linalg.norm(pv, axis=0)


def _surface_window(surface, func, u0, v0, x, eps):
    pu_, pv_ = getattr(surface, "chart_period", (1.0, 1.0))
    m = 160
    du = (np.arange(m) / m - 0.5) * pu_
    dv = (np.arange(m) / m - 0.5) * pv_
    if surface.name == "sphere":
        dv = np.linspace(-0.49 * pv_, 0.49 * pv_, m)
    DU, DV = np.meshgrid(du, dv, indexing="ij")
    p, _, _, su, sv = _chart_eval(func, u0 + DU.ravel(), v0 + DV.ravel())
    dist = np.linalg.norm(p - np.asarray(x)[:, None], axis=0)
    cut = 2 * U_CUT * math.sqrt(eps)
    grid = max(np.max(su) * pu_ / m, np.max(sv) * pv_ / m)
    sel = dist < cut + 2 * grid
    wu = min(np.max(np.abs(DU.ravel()[sel])) + 2 * pu_ / m, 0.5 * pu_)
    wv = min(np.max(np.abs(DV.ravel()[sel])) + 2 * pv_ / m, 0.49 * pv_)
    return wu, wv, float(np.max(su[sel])), float(np.max(sv[sel]))


def _surface_nodes(surface, x, eps, n, r, st):
    func, u0, v0 = surface.chart(*st)
    wu, wv, su, sv = _surface_window(surface, func, u0, v0, x, eps)
    se = math.sqrt(eps)
    base = max(min(r, se), 1e-3 * se)
    bu = graded_breaks(wu, wu, base / (2 * su), 1.5 * se / su) + u0
    bv = graded_breaks(wv, wv, base / (2 * sv), 1.5 * se / sv) + v0
    u, wtu = composite(bu, n)
    v, wtv = composite(bv, n)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wtu, wtv)
    return func, U.ravel(), V.ravel(), W.ravel()


def _surface_layer(surface, density, x, eps, variant, n, route, r, st, chunk=200000):
    func, U, V, W = _surface_nodes(surface, x, eps, n, r, st)
    total = 0.0
    for i in range(0, len(U), chunk):
        p, nu, jac, _, _ = _chart_eval(func, U[i:i + chunk], V[i:i + chunk])
        d = np.asarray(x)[:, None] - p
        rho2 = np.sum(d * d, axis=0)
        wt = W[i:i + chunk] * jac * np.asarray(density(p[0], p[1], p[2]), dtype=float)
        if variant == "dipole":
            wt = wt * np.sum(d * nu, axis=0)
        if route == "closed":
            total += float(np.sum(wt * residual_kernel(3, variant, np.sqrt(rho2), eps)))
        else:
            keep = wt != 0
            total += _time_route(3, variant, rho2[keep], wt[keep], eps, n)
    return total


# ----------------------------------------------------------------------------
# volumes (rays from the target)
# ----------------------------------------------------------------------------
def _radial_rule(rend, eps, n, graded):
    """Per-ray composite rule on [0, rend]; graded toward 0 for the log kernel."""
    se = math.sqrt(eps)
    x, w = gauss_legendre(n)
    if graded:
        g = se * 0.5 ** np.arange(0, 40)[::-1]
        fixed = np.concatenate([[0.0], g[g < 0.5 * se]])
    else:
        fixed = np.array([0.0])
    m = 16
    nodes, weights = [], []
    for a, b in zip(fixed[:-1], fixed[1:]):
        nodes.append(np.full_like(rend, 0.5 * (a + b))[:, None] + 0.5 * (b - a) * x)
        weights.append(np.full_like(rend, 0.5 * (b - a))[:, None] * w)
    start = fixed[-1]
    span = np.maximum(rend - start, 0.0)
    for j in range(m):
        a = start + span * j / m
        b = start + span * (j + 1) / m
        nodes.append(0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * x)
        weights.append(0.5 * (b - a)[:, None] * w)
    return np.concatenate(nodes, axis=1), np.concatenate(weights, axis=1)


def _volume_2d(domain, f, x, eps, n, ntheta):
    x = np.asarray(x, dtype=float)
    _, b, r, _ = domain.closest(x)
    axis = math.atan2(b[1] - x[1], b[0] - x[0])
    th = axis + 2 * math.pi * np.arange(ntheta) / ntheta
    dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    rend = np.minimum(domain.ray_exit(x, dirs), 2 * U_CUT * math.sqrt(eps))
    rho, w = _radial_rule(rend, eps, n, graded=True)
    px = x[0] + rho * dirs[:, 0:1]
    py = x[1] + rho * dirs[:, 1:2]
    val = np.asarray(f(px, py), dtype=float) * np.ones_like(rho)
    k = residual_kernel(2, "single", rho, eps)
    return float(2 * math.pi / ntheta * np.sum(w * rho * k * val))


def _closest_3d(domain, x):
    if isinstance(domain, geo.Ball):
        b, r, side = geo.closest_point_sphere(domain.radius, x, domain.center)
        return b, r
    if isinstance(domain, geo.SolidTorus):
        b, r, side, _ = geo.closest_point_torus(domain.R, domain.rho, x)
        return b, r
    raise NotImplementedError


def _volume_3d(domain, f, x, eps, n, ntheta, nphi):
    x = np.asarray(x, dtype=float)
    b, r = _closest_3d(domain, x)
    e3 = (b - x) / np.linalg.norm(b - x)
    a = np.array([1.0, 0, 0]) if abs(e3[0]) < 0.9 else np.array([0, 1.0, 0])
    e1 = np.cross(e3, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(e3, e1)
    th, wth = composite(np.linspace(0, math.pi, 9), max(ntheta // 8, 4))
    ph = 2 * math.pi * np.arange(nphi) / nphi
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    W = np.outer(wth * np.sin(th), np.full(nphi, 2 * math.pi / nphi)).ravel()
    st, ct = np.sin(TH).ravel(), np.cos(TH).ravel()
    dirs = (ct[:, None] * e3 + (st * np.cos(PH.ravel()))[:, None] * e1 + (st * np.sin(PH.ravel()))[:, None] * e2)
    rend = np.minimum(domain.ray_exit(x, dirs), 2 * U_CUT * math.sqrt(eps))
    rho, w = _radial_rule(rend, eps, n, graded=False)
    P = [x[k] + rho * dirs[:, k:k + 1] for k in range(3)]
    val = np.asarray(f(*P), dtype=float) * np.ones_like(rho)
    # rho^2 * erfc(rho / 2 sqrt(eps)) / (4 pi rho)
    k = rho * erfc(rho / (2 * math.sqrt(eps))) / (4 * math.pi)
    return float(np.sum(W[:, None] * w * k * val))


# ----------------------------------------------------------------------------
# half space with the discontinuous Gaussian source
# ----------------------------------------------------------------------------
def half_space_gaussian_oracle(r, eps):
    """u_L at (0, r) for g = exp(-|x|^2) on x2 > 0, zero elsewhere.

    The x1 integral and the x2 integral of the Gaussian source against the
    heat kernel are done in closed form, leaving a time quadrature in z = sqrt(t).
    """
    def integrand(z):
        t = z * z
        q = 1 + 4 * t
        return 2 * z * math.exp(-r * r / q) * erfc(-r / math.sqrt(4 * t * q)) / (2 * q) if z > 0 else 0.0
    se = math.sqrt(eps)
    pts = [p for p in (r / 4, r / 2, r) if 0 < p < se]
    val, err = integrate.quad(integrand, 0.0, se, points=pts or None, epsabs=0.0, epsrel=1e-13, limit=400)
    return val, err


# ----------------------------------------------------------------------------
# public entry point
# ----------------------------------------------------------------------------
def local_time_quadrature(src, target, eps, tol=1e-10, route="closed", n=16, return_error=False):
    """Reference local part (canonical sign) of a scalar source at ``target``."""
    x = np.asarray(target, dtype=float)
    variant = {"single": "single", "double": "dipole"}.get(src.kind)
    if src.kind == "halfspace":
        val, err = half_space_gaussian_oracle(float(src.extra.get("r", x[1])), eps)
        return (val, err) if return_error else val

    def run(m):
        if src.kind == "volume":
            if src.dim == 2:
                return _volume_2d(src.geometry, src.density, x, eps, m, ntheta=src.extra.get("ntheta", 256))
            return _volume_3d(src.geometry, src.density, x, eps, m, ntheta=src.extra.get("ntheta", 128),
                              nphi=src.extra.get("nphi", 96))
        if src.dim == 2:
            s_star, b, r, side = geo.closest_point_curve(src.geometry, x)
            return _curve_layer(src.geometry, src.density, x, eps, variant, m, route, s_star, r)
        b, r, st = _surface_closest(src.geometry, x)
        return _surface_layer(src.geometry, src.density, x, eps, variant, m, route, r, st)

    v1 = run(n)
    v2 = run(n + 8)
    err = _check(v1, v2, tol, eps * 1e-3)
    return (v2, err) if return_error else v2


# ----------------------------------------------------------------------------
# coupled oracle: physical-space heat series
# ----------------------------------------------------------------------------
def _pmul(p, q):
    out = {}
    for (a, b), u in p.items():
        for (c, d), v in q.items():
            key = (a + c, b + d)
            out[key] = out.get(key, 0.0) + u * v
    return out


def _padd(p, q, s=1.0):
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0.0) + s * v
    return out


def operator_powers(coef, kmax):
    """Blocks of N^k, N = [[0, A], [B, 0]], as polynomials in (d1, d2)."""
    A = {(1, 0): coef.alpha[0], (0, 1): coef.alpha[1], (0, 0): coef.alpha3}
    B = {(1, 0): coef.beta[0], (0, 1): coef.beta[1], (0, 0): coef.beta3}
    cur = [[{(0, 0): 1.0}, {}], [{}, {(0, 0): 1.0}]]
    out = [cur]
    for _ in range(kmax):
        cur = [[_pmul(A, cur[1][0]), _pmul(A, cur[1][1])], [_pmul(B, cur[0][0]), _pmul(B, cur[0][1])]]
        out.append(cur)
    return out


def _hermite_table(u, nmax):
    H = [np.ones_like(u), 2 * u]
    for k in range(1, nmax):
        H.append(2 * u * H[k] - 2 * k * H[k - 1])
    return H


def _series_kernel_blocks(powers, t, z1, z2, extra=None):
    """sum_k (-t)^k/k! [N^k K_t](z) per block; ``extra`` multiplies by another operator polynomial."""
    st = math.sqrt(t)
    comb = [[{}, {}], [{}, {}]]
    for k, blk in enumerate(powers):
        fac = (-t) ** k / math.factorial(k)
        for i in range(2):
            for j in range(2):
                comb[i][j] = _padd(comb[i][j], blk[i][j], fac)
    if extra is not None:
        comb = [[_pmul(extra, comb[i][j]) for j in range(2)] for i in range(2)]
    deg = max([a + b for i in range(2) for j in range(2) for (a, b) in comb[i][j]] + [0])
    u1, u2 = z1 / (2 * st), z2 / (2 * st)
    H1, H2 = _hermite_table(u1, deg + 1), _hermite_table(u2, deg + 1)
    K = np.exp(-(u1 * u1 + u2 * u2)) / (4 * math.pi * t)
    out = [[None, None], [None, None]]
    for i in range(2):
        for j in range(2):
            acc = np.zeros_like(z1)
            for (a, b), cval in comb[i][j].items():
                if cval != 0.0:
                    acc = acc + cval * (-0.5 / st) ** (a + b) * H1[a] * H2[b]
            out[i][j] = acc * K
    return out


def coupled_local_heat_series(kind, geometry, densities, coef, target, eps, kmax=14, n=16, nz=12,
                              ntheta=192, return_error=False, tol=1e-9):
    """Coupled local part [u1, u2] by the physical-space heat series.

    kind "volume" (geometry a Disc), "single" or "double" (geometry a Curve2D,
    double meaning u_L[div(nu mu delta)]).  ``densities`` = (d1, d2) callables of (x, y).
    """
    require_admissible(coef, require_invertible=False)
    x = np.asarray(target, dtype=float)

    def run(m, km, mz):
        powers = operator_powers(coef, km)
        z, wz = composite(np.linspace(0, math.sqrt(eps), 9), mz)
        res = np.zeros(2)
        if kind == "volume":
            _, b, r, _ = geometry.closest(x)
            axis = math.atan2(b[1] - x[1], b[0] - x[0])
            th = axis + 2 * math.pi * np.arange(ntheta) / ntheta
            dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
            ex = geometry.ray_exit(x, dirs)
            for zi, wi in zip(z, wz):
                t = zi * zi
                rend = np.minimum(ex, 2 * U_CUT * zi)
                rho, w = _radial_rule(rend, t, m, graded=False)
                px = x[0] + rho * dirs[:, 0:1]
                py = x[1] + rho * dirs[:, 1:2]
                F = [np.asarray(d(px, py), dtype=float) * np.ones_like(rho) for d in densities]
                blk = _series_kernel_blocks(powers, t, x[0] - px, x[1] - py)
                ww = w * rho * (2 * math.pi / ntheta)
                for i in range(2):
                    res[i] += wi * 2 * zi * sum(np.sum(ww * blk[i][j] * F[j]) for j in range(2))
            return res
        s_star, b, r, side = geo.closest_point_curve(geometry, x)
        s, w = _curve_nodes(geometry, s_star, r, eps, m)
        p = geometry(s)
        nu, speed = geometry.normals(s)
        F = [np.asarray(d(p[0], p[1]), dtype=float) * np.ones_like(s) for d in densities]
        ww = w * speed
        z1, z2 = x[0] - p[0], x[1] - p[1]
        for zi, wi in zip(z, wz):
            t = zi * zi
            if kind == "single":
                blk = _series_kernel_blocks(powers, t, z1, z2)
            else:
                b1 = _series_kernel_blocks(powers, t, z1, z2, extra={(1, 0): 1.0})
                b2 = _series_kernel_blocks(powers, t, z1, z2, extra={(0, 1): 1.0})
                blk = [[nu[0] * b1[i][j] + nu[1] * b2[i][j] for j in range(2)] for i in range(2)]
            for i in range(2):
                res[i] += wi * 2 * zi * sum(np.sum(ww * blk[i][j] * F[j]) for j in range(2))
        return res

    v1 = run(n, kmax, nz)
    v2 = run(n + 8, kmax + 4, nz + 8)
    err = _check(v1, v2, tol, eps * 1e-3)
    return (v2, err) if return_error else v2


# ----------------------------------------------------------------------------
# coupled oracle: Fourier quadrature
# ----------------------------------------------------------------------------
def gaussian_fourier(amplitude, width, center):
    """F^(xi) of amplitude * exp(-|y - center|^2 / width^2)."""
    c = np.asarray(center, dtype=float)

    def fhat(xi):
        q = np.sum(xi * xi, axis=-1)
        return amplitude * math.pi * width ** 2 * np.exp(-width ** 2 * q / 4) * np.exp(-1j * (xi @ c))
    return fhat


def quadrature_fourier(nodes, weights, values):
    """F^ from a quadrature of the source: sum_j w_j f(y_j) exp(-i xi . y_j)."""
    nodes = np.asarray(nodes, dtype=float)
    wv = np.asarray(weights) * np.asarray(values)

    def fhat(xi):
        return np.exp(-1j * (xi @ nodes.T)) @ wv
    return fhat


def _polar_fourier(symbol_fn, fhats, x, xi_max, nrad, nang):
    # uniform panels plus geometric grading toward xi = 0, where the lower-order
    # coupling terms set a scale independent of xi_max
    br = np.union1d(np.linspace(0, xi_max, max(nrad // 16, 1) + 1), xi_max * 2.0 ** -np.arange(5, 13))
    rad, wr = composite(br, 16)
    th = 2 * math.pi * np.arange(nang) / nang
    R, TH = np.meshgrid(rad, th, indexing="ij")
    xi = np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1).reshape(-1, 2)
    w = (np.outer(wr * rad, np.full(nang, 2 * math.pi / nang))).ravel()
    W = symbol_fn(xi)
    F = np.stack([fh(xi) for fh in fhats], axis=-1)
    U = np.einsum("nij,nj->ni", W, F)
    ph = np.exp(1j * (xi @ np.asarray(x, dtype=float)))
    return (U * (w * ph)[:, None]).sum(axis=0) / (2 * math.pi) ** 2


def coupled_local_fourier(fhats, coef, target, eps, xi_max, nrad=256, nang=128, return_error=False, tol=1e-8):
    """(2 pi)^-2 int M^-1 (I - e^{-M eps}) F^ e^{i xi.x} d xi on a polar grid.

    Intended for smooth sources (Gaussian F^); ``xi_max`` must cover F^.
    Returns the real part; the imaginary part and the change under grid
    refinement are checked against ``tol``.
    """
    require_admissible(coef, require_invertible=False)
    fn = lambda xi: local_symbol_integral(coef, xi, eps)
    v1 = _polar_fourier(fn, fhats, target, xi_max, nrad, nang)
    v2 = _polar_fourier(fn, fhats, target, xi_max * 1.25, int(nrad * 1.5), int(nang * 1.5))
    scale = float(np.max(np.abs(v2)))
    if float(np.max(np.abs(v2.imag))) > tol * max(scale, 1e-300):
        raise AccuracyError("Fourier result not real", float(np.max(np.abs(v2.imag))))
    err = _check(v1.real, v2.real, tol, 1e-300)
    return (v2.real, err) if return_error else v2.real
