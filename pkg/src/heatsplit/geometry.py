"""Closed curves and surfaces, closest-point projection and local graph jets.

Frames.  At a closest point b the local frame has x1 along the unit tangent
(x1, x2 along principal directions in 3D) and the last axis along the *inward*
normal, so an interior target sits at (0, r) or (0, 0, r).  In that frame the
boundary is the graph x_last = gamma(x1[, x2]) with gamma(0) = 0, grad gamma(0) = 0,
and the curvature is positive for a domain that is convex toward the target
(a circle of radius R gives kappa = 1/R).
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import optimize

from . import taylor as T
from .taylor import TPS, revert


class AmbiguousProjectionError(ValueError):
    """Target (nearly) equidistant from several boundary points."""


class ProjectionError(ArithmeticError):
    """Closest-point iteration failed to converge."""


class DegenerateParameterizationError(ValueError):
    pass


class InsufficientJetError(ValueError):
    pass


# ----------------------------------------------------------------------------
# curves
# ----------------------------------------------------------------------------
class Curve2D:
    """Periodic closed curve s in [0, 1) -> R^2.

    ``func(s)`` must return a pair (x, y) and accept floats, arrays and TPS
    (write it with :mod:`heatsplit.taylor` cos/sin/exp).  ``ccw`` records the
    orientation; the outward normal is the tangent rotated clockwise for a
    counterclockwise curve.
    """

    def __init__(self, func, ccw=True, name="curve"):
        self.func = func
        self.ccw = ccw
        self.name = name

    def __call__(self, s):
        x, y = self.func(s)
        return np.array([x, y])

    def taylor(self, s0, order):
        h = TPS.variable(0, float(s0), 1, order)
        x, y = self.func(h)
        return x, y

    def derivatives(self, s0, order=2):
        x, y = self.taylor(s0, order)
        return np.array([[x.derivative((k,)), y.derivative((k,))] for k in range(order + 1)])

    def outward_normal(self, s):
        d = self.derivatives(s, 1)[1]
        n = np.array([d[1], -d[0]]) / np.hypot(*d)
        return n if self.ccw else -n

    def normals(self, s):
        """Vectorised outward unit normals and speeds |p'(s)|."""
        s = np.asarray(s, dtype=float)
        h = TPS.variable(0, s, 1, 1)
        x, y = self.func(h)
        dx, dy = x[(1,)], y[(1,)]
        speed = np.hypot(dx, dy)
        n = np.array([dy, -dx]) / speed
        return (n if self.ccw else -n), speed


def circle(radius=1.0, center=(0.0, 0.0)):
    cx, cy = center
    tau = 2.0 * math.pi

    def f(s):
        return cx + radius * T.cos(tau * s), cy + radius * T.sin(tau * s)
    return Curve2D(f, ccw=True, name="circle")


def ellipse(a=2.0, b=1.0):
    tau = 2.0 * math.pi

    def f(s):
        return a * T.cos(tau * s), b * T.sin(tau * s)
    return Curve2D(f, ccw=True, name="ellipse")


def trig_curve(xcoef, ycoef):
    """x(s) = sum_k xc_k cos(2 pi k s) + xs_k sin(2 pi k s), likewise y.

    ``xcoef``/``ycoef`` are lists of (cos_coef, sin_coef) for k = 0, 1, ...
    """
    tau = 2.0 * math.pi

    def f(s):
        x = 0.0 * s
        y = 0.0 * s
        for k, (cx, sx) in enumerate(xcoef):
            x = x + cx * T.cos(tau * k * s) + sx * T.sin(tau * k * s)
        for k, (cy, sy) in enumerate(ycoef):
            y = y + cy * T.cos(tau * k * s) + sy * T.sin(tau * k * s)
        return x, y
    # orientation from the signed area
    s = np.linspace(0, 1, 512, endpoint=False)
    x, y = f(s)
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    return Curve2D(f, ccw=area > 0, name="trig")


@dataclass
class GeometryJet2D:
    b: np.ndarray
    r: float
    side: int
    kappa: float = 0.0
    g3: float = 0.0
    g4: float = 0.0
    tangent: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))
    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))  # inward
    s: float = 0.0


def _periodic_minima(d):
    left, right = np.roll(d, 1), np.roll(d, -1)
    return np.nonzero((d <= left) & (d <= right))[0]


def closest_point_curve(curve, x, nsample=256, ambiguity=1e-9):
    """Closest point on a closed curve.

    Returns (s, b, r, side).  Coarse sampling brackets each local minimum,
    bounded Brent minimisation refines it and Newton on the orthogonality
    condition polishes it.  Raises AmbiguousProjectionError when two distinct
    minimisers are within ``ambiguity`` (relative) of each other.
    """
    x = np.asarray(x, dtype=float)
    s = np.arange(nsample) / nsample
    pts = curve(s)
    d = np.hypot(pts[0] - x[0], pts[1] - x[1])
    cands = _periodic_minima(d)
    h = 1.0 / nsample
    found = []
    for i in cands:
        res = optimize.minimize_scalar(lambda t: float(np.hypot(*(curve(t) - x))),
                                       bounds=(s[i] - h, s[i] + h), method="bounded",
                                       options={"xatol": 1e-12})
        t = res.x
        for _ in range(30):
            p = curve.derivatives(t, 2)
            g = np.dot(p[0] - x, p[1])
            dg = np.dot(p[1], p[1]) + np.dot(p[0] - x, p[2])
            if dg <= 0:
                break
            step = g / dg
            t -= step
            if abs(step) < 1e-15:
                break
        p = curve.derivatives(t, 1)
        found.append((float(np.hypot(*(p[0] - x))), t % 1.0, p))
    if not found:
        raise ProjectionError("no local minimum found")
    found.sort(key=lambda z: z[0])
    r, t, p = found[0]
    for r2, t2, p2 in found[1:]:
        if r2 - r <= ambiguity * max(r, 1e-300) and np.hypot(*(p2[0] - p[0])) > 1e-8:
            raise AmbiguousProjectionError("target is near the medial axis")
    if abs(np.dot(p[0] - x, p[1])) > 1e-10 * max(r, 1e-14) * np.hypot(*p[1]) + 1e-14:
        raise ProjectionError("orthogonality residual too large")
    nu = curve.outward_normal(t)
    side = int(np.sign(np.dot(x - p[0], nu))) if r > 1e-14 else 0
    return t, p[0], r, side


def _frame_2d(curve, s0):
    d = curve.derivatives(s0, 1)
    speed = np.hypot(*d[1])
    if speed < 1e-12:
        raise DegenerateParameterizationError("vanishing speed")
    t = d[1] / speed
    n_in = -curve.outward_normal(s0)
    return d[0], t, n_in


def _graph_map_2d(curve, s0, order):
    b, t, n = _frame_2d(curve, s0)
    px, py = curve.taylor(s0, order)
    X1 = (px - b[0]) * t[0] + (py - b[1]) * t[1]
    X2 = (px - b[0]) * n[0] + (py - b[1]) * n[1]
    hinv = revert([X1])
    return b, t, n, X2, hinv


def graph_jet_2d(curve, s0, x=None, order=5):
    """Local graph jet at parameter s0: kappa = gamma'', g3, g4 (plus frame)."""
    b, t, n, X2, hinv = _graph_map_2d(curve, s0, order)
    gam = X2.compose(hinv)
    r, side = 0.0, 0
    if x is not None:
        dx = np.asarray(x, dtype=float) - b
        r = float(np.hypot(*dx))
        side = int(-np.sign(np.dot(dx, n))) if r > 1e-14 else 0
    jet = GeometryJet2D(b=b, r=r, side=side, kappa=gam.derivative((2,)), g3=gam.derivative((3,)),
                        g4=gam.derivative((4,)), tangent=t, normal=n, s=s0)
    jet.gamma5 = gam.derivative((5,)) if order >= 5 else 0.0
    return jet


def density_jet_2d(curve, s0, density, order=4, of="point"):
    """Graph-coordinate derivatives sigma^(n)(0), n = 0..order.

    ``density`` is a TPS-compatible function of the boundary point (x, y) when
    ``of == "point"`` or of the parameter s when ``of == "param"``.
    """
    b, t, n, X2, hinv = _graph_map_2d(curve, s0, max(order, 1))
    if of == "param":
        sig = density(TPS.variable(0, float(s0), 1, max(order, 1)))
    else:
        px, py = curve.taylor(s0, max(order, 1))
        sig = density(px, py)
    if not isinstance(sig, TPS):
        sig = TPS.constant(float(sig), 1, max(order, 1))
    comp = sig.compose(hinv)
    return np.array([comp.derivative((k,)) for k in range(order + 1)])


def volume_jet_2d(f, x, tangent, normal, order=2):
    """Partials f^(m,n) at x in the frame (tangent, inward normal), m+n <= order."""
    X1, X2 = TPS.variables([0.0, 0.0], order)
    px = x[0] + X1 * tangent[0] + X2 * normal[0]
    py = x[1] + X1 * tangent[1] + X2 * normal[1]
    val = f(px, py)
    if not isinstance(val, TPS):
        val = TPS.constant(float(val), 2, order)
    return {a: val.derivative(a) for a in val_indices(2, order)}


def val_indices(nvar, order):
    from .taylor import multi_indices
    return multi_indices(nvar, order)


# ----------------------------------------------------------------------------
# surfaces
# ----------------------------------------------------------------------------
class Surface3D:
    """Doubly periodic surface (s, t) in [0, 1)^2 -> R^3 with outward normal p_s x p_t.

    ``func(s, t)`` returns (x, y, z) and must accept floats, arrays and TPS.
    ``chart(b)`` may supply a local regular parameterisation (func, s0, t0)
    around a point; the default uses the global one.
    """

    def __init__(self, func, name="surface", inverse=None):
        self.func = func
        self.name = name
        self.inverse = inverse  # point on surface -> (s, t)

    def __call__(self, s, t):
        return np.array(self.func(s, t))

    def taylor(self, s0, t0, order):
        hs, ht = TPS.variables([float(s0), float(t0)], order)
        return self.func(hs, ht)

    def chart(self, s0, t0):
        return self.func, s0, t0

    def frame(self, s0, t0):
        func, a, c = self.chart(s0, t0)
        hs, ht = TPS.variables([float(a), float(c)], 1)
        P = func(hs, ht)
        b = np.array([p.value for p in P], dtype=float)
        ps = np.array([p[(1, 0)] for p in P], dtype=float)
        pt = np.array([p[(0, 1)] for p in P], dtype=float)
        nrm = np.cross(ps, pt)
        if np.linalg.norm(nrm) < 1e-14:
            raise DegenerateParameterizationError("singular chart")
        return b, ps, pt, nrm / np.linalg.norm(nrm)


def torus(R=0.5, rho=0.3):
    tau = 2.0 * math.pi

    def f(s, t):
        phi, th = tau * s, tau * t
        a = R + rho * T.cos(th)
        return a * T.cos(phi), a * T.sin(phi), rho * T.sin(th)

    def inv(p):
        phi = math.atan2(p[1], p[0])
        th = math.atan2(p[2], math.hypot(p[0], p[1]) - R)
        return (phi / tau) % 1.0, (th / tau) % 1.0
    surf = Surface3D(f, name="torus", inverse=inv)
    surf.R, surf.rho = R, rho
    surf.chart_period = (1.0, 1.0)
    return surf


class _Sphere(Surface3D):
    def chart(self, s0, t0):
        # rotate so the requested point sits on the equator of the chart
        p = np.array(self.func(s0, t0))
        e3 = p / np.linalg.norm(p)
        a = np.array([0.0, 0.0, 1.0]) if abs(e3[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
        e1 = np.cross(a, e3)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(e3, e1)
        R, c0 = self.R, self.center

        def g(u, v):
            cu, su, cv, sv = T.cos(u), T.sin(u), T.cos(v), T.sin(v)
            w3, w1, w2 = cu * cv, su * cv, sv
            return tuple(c0[k] + R * (w3 * e3[k] + w1 * e1[k] + w2 * e2[k]) for k in range(3))
        return g, 0.0, 0.0


def sphere(R=1.0, center=(0.0, 0.0, 0.0)):
    tau = 2.0 * math.pi
    c0 = np.asarray(center, dtype=float)

    def f(s, t):
        phi, th = tau * s, math.pi * (t - 0.5) if not isinstance(t, TPS) else (t - 0.5) * math.pi
        return (c0[0] + R * T.cos(th) * T.cos(phi), c0[1] + R * T.cos(th) * T.sin(phi), c0[2] + R * T.sin(th))

    def inv(p):
        q = np.asarray(p) - c0
        phi = math.atan2(q[1], q[0])
        th = math.asin(max(-1.0, min(1.0, q[2] / np.linalg.norm(q))))
        return (phi / tau) % 1.0, th / math.pi + 0.5
    surf = _Sphere(f, name="sphere", inverse=inv)
    surf.R, surf.center = R, c0
    surf.chart_period = (2 * math.pi, math.pi)
    return surf


@dataclass
class GeometryJet3D:
    b: np.ndarray
    r: float
    side: int
    kappa1: float
    kappa2: float
    gmn: dict
    e1: np.ndarray
    e2: np.ndarray
    normal: np.ndarray  # inward
    umbilic: bool = False

    @property
    def gH(self):
        return 0.5 * (self.kappa1 + self.kappa2)

    @property
    def gK(self):
        return self.kappa1 * self.kappa2


def _graph_map_3d(surface, s0, t0, order):
    func, a, c = surface.chart(s0, t0)
    b, ps, pt, nout = surface.frame(s0, t0)
    n = -nout
    e1 = ps / np.linalg.norm(ps)
    e2 = np.cross(n, e1)
    P = func(*TPS.variables([float(a), float(c)], order))
    d = [P[k] - b[k] for k in range(3)]
    X = [sum(d[k] * e[k] for k in range(3)) for e in (e1, e2, n)]
    hinv = revert(X[:2])
    gam = X[2].compose(hinv)
    # rotate into principal directions
    hess = np.array([[gam.derivative((2, 0)), gam.derivative((1, 1))],
                     [gam.derivative((1, 1)), gam.derivative((0, 2))]])
    w, V = np.linalg.eigh(hess)
    V = V[:, ::-1]
    if np.linalg.det(V) < 0:
        V[:, 1] = -V[:, 1]
    f1 = V[0, 0] * e1 + V[1, 0] * e2
    f2 = V[0, 1] * e1 + V[1, 1] * e2
    Y1, Y2 = TPS.variables([0.0, 0.0], order)
    lin = [Y1 * V[0, 0] + Y2 * V[0, 1], Y1 * V[1, 0] + Y2 * V[1, 1]]
    gam_p = gam.compose(lin)
    hinv_p = [h.compose(lin) for h in hinv]
    return b, f1, f2, n, gam_p, hinv_p, (func, a, c), w[::-1]


def graph_jet_3d(surface, s0, t0, x=None, order=4):
    b, e1, e2, n, gam, _, _, w = _graph_map_3d(surface, s0, t0, order)
    gmn = {}
    for m in range(order + 1):
        for k in range(order + 1 - m):
            if m + k >= 3:
                gmn[(m, k)] = gam.derivative((m, k))
    r, side = 0.0, 0
    if x is not None:
        dx = np.asarray(x, dtype=float) - b
        r = float(np.linalg.norm(dx))
        side = int(-np.sign(np.dot(dx, n))) if r > 1e-14 else 0
    k1, k2 = gam.derivative((2, 0)), gam.derivative((0, 2))
    return GeometryJet3D(b=b, r=r, side=side, kappa1=k1, kappa2=k2, gmn=gmn, e1=e1, e2=e2, normal=n,
                         umbilic=abs(k1 - k2) <= 1e-9 * max(1.0, abs(k1)))


def density_jet_3d(surface, s0, t0, density, order=2):
    """Graph-coordinate partials {(m, n): d^m_1 d^n_2 sigma} in the principal frame."""
    ordr = max(order, 1)
    b, e1, e2, n, gam, hinv, (func, a, c), _ = _graph_map_3d(surface, s0, t0, ordr)
    P = func(*TPS.variables([float(a), float(c)], ordr))
    sig = density(*P)
    if not isinstance(sig, TPS):
        sig = TPS.constant(float(sig), 2, ordr)
    comp = sig.compose(hinv)
    from .taylor import multi_indices
    return {al: comp.derivative(al) for al in multi_indices(2, order)}


def volume_jet_3d(f, x, e1, e2, normal, order=2):
    from .taylor import multi_indices
    Y = TPS.variables([0.0, 0.0, 0.0], order)
    P = [x[k] + Y[0] * e1[k] + Y[1] * e2[k] + Y[2] * normal[k] for k in range(3)]
    val = f(*P)
    if not isinstance(val, TPS):
        val = TPS.constant(float(val), 3, order)
    return {al: val.derivative(al) for al in multi_indices(3, order)}


def closest_point_torus(R, rho, x, tol=1e-12):
    """Analytic projection onto the torus; returns (b, r, side, (s, t))."""
    x = np.asarray(x, dtype=float)
    rxy = math.hypot(x[0], x[1])
    if rxy < tol * max(R, 1.0):
        raise AmbiguousProjectionError("target on the symmetry axis")
    c0 = np.array([R * x[0] / rxy, R * x[1] / rxy, 0.0])
    d = x - c0
    dn = np.linalg.norm(d)
    if dn < tol * max(rho, 1.0):
        raise AmbiguousProjectionError("target on the tube centre circle")
    b = c0 + rho * d / dn
    r = abs(dn - rho)
    side = int(np.sign(dn - rho)) if r > 1e-14 else 0
    tau = 2.0 * math.pi
    s = (math.atan2(x[1], x[0]) / tau) % 1.0
    t = (math.atan2(x[2], rxy - R) / tau) % 1.0
    return b, r, side, (s, t)


def closest_point_sphere(R, x, center=(0.0, 0.0, 0.0)):
    x = np.asarray(x, dtype=float)
    q = x - np.asarray(center)
    nq = np.linalg.norm(q)
    if nq < 1e-14:
        raise AmbiguousProjectionError("target at the sphere centre")
    b = np.asarray(center) + R * q / nq
    r = abs(nq - R)
    side = int(np.sign(nq - R)) if r > 1e-14 else 0
    return b, r, side


def closest_point_surface(surface, x):
    """Closest point for the built-in surfaces; returns (b, r, side, (s, t))."""
    if surface.name == "torus":
        return closest_point_torus(surface.R, surface.rho, x)
    if surface.name == "sphere":
        b, r, side = closest_point_sphere(surface.R, x, surface.center)
        return b, r, side, surface.inverse(b)
    raise NotImplementedError("closest point only for built-in surfaces")


# ----------------------------------------------------------------------------
# solid domains (ray exits for volume quadrature)
# ----------------------------------------------------------------------------
class Disc:
    dim = 2

    def __init__(self, radius=1.0, center=(0.0, 0.0)):
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)
        self.boundary = circle(radius, center)

    def contains(self, x):
        return np.linalg.norm(np.asarray(x) - self.center) < self.radius

    def ray_exit(self, x, dirs):
        """Distance from interior x to the boundary along unit directions (n, 2)."""
        q = np.asarray(x) - self.center
        b = dirs @ q
        return -b + np.sqrt(b * b - (q @ q - self.radius ** 2))

    def closest(self, x):
        b, r, side = closest_point_sphere(self.radius, np.append(x, 0.0), np.append(self.center, 0.0))
        q = np.asarray(x) - self.center
        s = (math.atan2(q[1], q[0]) / (2 * math.pi)) % 1.0
        return s, b[:2], r, side


class Ball:
    dim = 3

    def __init__(self, radius=1.0, center=(0.0, 0.0, 0.0)):
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)
        self.boundary = sphere(radius, center)

    def contains(self, x):
        return np.linalg.norm(np.asarray(x) - self.center) < self.radius

    def ray_exit(self, x, dirs):
        q = np.asarray(x) - self.center
        b = dirs @ q
        return -b + np.sqrt(b * b - (q @ q - self.radius ** 2))


class SolidTorus:
    dim = 3

    def __init__(self, R=0.5, rho=0.3):
        self.R, self.rho = float(R), float(rho)
        self.boundary = torus(R, rho)

    def level(self, p):
        p = np.asarray(p)
        q = np.sum(p * p, axis=-1) + self.R ** 2 - self.rho ** 2
        return q * q - 4 * self.R ** 2 * (p[..., 0] ** 2 + p[..., 1] ** 2)

    def contains(self, x):
        return self.level(x) < 0

    def ray_exit(self, x, dirs):
        """First positive root of the torus quartic along each ray (companion eigenvalues + Newton)."""
        x = np.asarray(x, dtype=float)
        w = np.asarray(dirs, dtype=float)
        B = 2 * (w @ x)
        C0 = x @ x + self.R ** 2 - self.rho ** 2
        wxy = w[:, 0] ** 2 + w[:, 1] ** 2
        bxy = 2 * (w[:, 0] * x[0] + w[:, 1] * x[1])
        cxy = x[0] ** 2 + x[1] ** 2
        R2 = 4 * self.R ** 2
        c3 = 2 * B
        c2 = B * B + 2 * C0 - R2 * wxy
        c1 = 2 * B * C0 - R2 * bxy
        c0 = np.full_like(B, C0 * C0 - R2 * cxy)
        n = len(B)
        comp = np.zeros((n, 4, 4))
        comp[:, 0, :] = -np.stack([c3, c2, c1, c0], axis=1)
        comp[:, 1, 0] = comp[:, 2, 1] = comp[:, 3, 2] = 1.0
        roots = np.linalg.eigvals(comp)
        real = np.where((np.abs(roots.imag) < 1e-6 * (1 + np.abs(roots.real))) & (roots.real > 0), roots.real, np.inf)
        t = np.min(real, axis=1)
        for _ in range(4):
            f = (((t + c3) * t + c2) * t + c1) * t + c0
            df = ((4 * t + 3 * c3) * t + 2 * c2) * t + c1
            t = t - f / df
        return t
