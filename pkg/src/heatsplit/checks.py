"""Measurement routines shared by the self-test and the test suite.

Expansion orders are measured at a fixed scaled distance c = r / sqrt(eps):
at fixed r the error eps^((P+1)/2) F(c) also moves along F, which is not
monotone in c, and the fitted slope would mix both effects.
"""
import math
import warnings

import numpy as np
from scipy import integrate, linalg

from . import coupled as C
from . import expansions2d as E2
from . import expansions3d as E3
from . import geometry as geo
from . import history as H
from . import oracle as O
from . import specfun as sf
from . import taylor as T
from .expansions2d import SplitParams

EPS_LADDER = (1.6e-3, 4e-4, 1e-4)
ORDERS_2D = {"single": (1, 2, 3, 4), "double": (0, 1, 2, 3, 4), "volume": (2, 3, 4)}
ORDERS_3D = {"single": (1, 2, 3), "double": (0, 1, 2, 3), "volume": (2, 3, 4)}
ORDERS_COUPLED = ORDERS_2D | {"double": (0, 1, 2, 3)}
GEOMETRIES = {
    "circle": lambda: geo.circle(), "ellipse": lambda: geo.ellipse(1.0, 0.6), "disc": lambda: geo.Disc(),
    "sphere": lambda: geo.sphere(), "torus": lambda: geo.torus(), "ball": lambda: geo.Ball(),
    "solid_torus": lambda: geo.SolidTorus(),
}


# densities: trigonometric polynomials on the circle, smooth fields elsewhere
def sigma_2d(x, y):
    return 1 + x + 0.3 * x * y


def mu_2d(x, y):
    return y + 0.3 * (x * x - y * y)


def f_2d(x, y):
    return 1 + x * x + 0.5 * y + T.exp(x) * T.cos(y)


def density_3d(x, y, z):
    return 1 + 0.5 * x + 0.3 * y * z + 0.2 * T.sin(2 * z)


def f_3d(x, y, z):
    return x * x + y - z * z * z + 0.3 * T.exp(0.5 * x)


def coupled_pair():
    d1 = lambda x, y: 1 + 0.5 * x + 0.3 * x * y + 0.2 * T.sin(2 * y)
    d2 = lambda x, y: 0.7 - 0.4 * y + 0.25 * x * x + 0.1 * T.cos(3 * x)
    return d1, d2


DEFAULT_COUPLING = C.CouplingCoefficients((0.3, 0.7), (0.6, 1.4), 0.5, -0.5)


def fitted_order(eps, errors):
    """Slope of log(error) against log(eps)."""
    return float(np.polyfit(np.log(np.asarray(eps, dtype=float)), np.log(np.asarray(errors, dtype=float)), 1)[0])


def _boundary(geometry):
    return getattr(geometry, "boundary", geometry)


def target_near_2d(curve, s0, r):
    b = np.asarray(curve(s0), dtype=float).ravel()
    return b - r * np.asarray(curve.outward_normal(s0), dtype=float).ravel()


def target_near_3d(surface, st, r):
    b, _, _, nout = surface.frame(*st)
    return b - r * nout


def local_2d(kind, x, curve, density, sp_list):
    s, b, r, side = geo.closest_point_curve(curve, x)
    jet = geo.graph_jet_2d(curve, s, x)
    if kind == "volume":
        fj = geo.volume_jet_2d(density, x, jet.tangent, jet.normal, 2)
        return [E2.vol_local_2d(fj, jet, SplitParams(sp.eps, sp.P, r)) for sp in sp_list]
    dj = geo.density_jet_2d(curve, s, density, order=4)
    fn = E2.slp_local_2d if kind == "single" else E2.dlp_local_2d
    return [fn(dj, jet, SplitParams(sp.eps, sp.P, r), "canonical") for sp in sp_list]


def local_3d(kind, x, surface, density, sp_list):
    b, r, side, st = geo.closest_point_surface(surface, x)
    jet = geo.graph_jet_3d(surface, *st, x=x)
    if kind == "volume":
        fj = geo.volume_jet_3d(density, x, jet.e1, jet.e2, jet.normal, 2)
        return [E3.vol_local_3d(fj, jet, SplitParams(sp.eps, sp.P, r)) for sp in sp_list]
    dj = geo.density_jet_3d(surface, *st, density, order=2)
    fn = E3.slp_local_3d if kind == "single" else E3.dlp_local_3d
    return [fn(dj, jet, SplitParams(sp.eps, sp.P, r)) for sp in sp_list]


def expansion_errors(kind, geometry, density, eps_list=EPS_LADDER, orders=None, where=None, c=1.0):
    """|expansion(P) - oracle| for each eps (rows) and P (columns) at r = c sqrt(eps).

    ``geometry`` is a curve or surface for layers and a Disc / Ball / SolidTorus
    for volumes.  Returns (errors, oracle error estimates).
    """
    bnd = _boundary(geometry)
    dim = 3 if isinstance(bnd, geo.Surface3D) else 2
    orders = orders or (ORDERS_3D if dim == 3 else ORDERS_2D)[kind]
    where = where if where is not None else ((0.1, 0.3) if dim == 3 else 0.3)
    src = O.SourceDescriptor(kind, geometry, density, dim)
    errs, oerr = [], []
    for eps in eps_list:
        r = c * math.sqrt(eps)
        x = target_near_3d(bnd, where, r) if dim == 3 else target_near_2d(bnd, where, r)
        ref, e = O.local_time_quadrature(src, x, eps, return_error=True)
        loc = (local_3d if dim == 3 else local_2d)(kind, x, bnd, density, [SplitParams(eps, P) for P in orders])
        errs.append([abs(v - ref) for v in loc])
        oerr.append(e)
    return np.array(errs), np.array(oerr)


def coupled_jets(kind, curve, densities, x):
    d1, d2 = densities
    s, b, r, side = geo.closest_point_curve(curve, x)
    jet = geo.graph_jet_2d(curve, s, x=x)
    if kind == "volume":
        return C.CoupledJets(jet, f1=geo.volume_jet_2d(d1, x, jet.tangent, jet.normal, 2),
                             f2=geo.volume_jet_2d(d2, x, jet.tangent, jet.normal, 2)), r
    s1 = geo.density_jet_2d(curve, s, d1, 2)
    s2 = geo.density_jet_2d(curve, s, d2, 2)
    return C.CoupledJets(jet, sigma1=s1, sigma2=s2, mu1=s1, mu2=s2), r


COUPLED_LOCAL = {"volume": C.coupled_vol_local, "single": C.coupled_slp_local, "double": C.coupled_dlp_local}


def coupled_expansion_errors(kind, geometry, densities=None, coef=DEFAULT_COUPLING, eps_list=EPS_LADDER,
                             orders=None, s0=0.7, c=1.0):
    """Max-component |coupled expansion(P) - heat-series oracle| (rows eps, columns P)."""
    densities = densities or coupled_pair()
    orders = orders or ORDERS_COUPLED[kind]
    curve = _boundary(geometry)
    errs, oerr = [], []
    for eps in eps_list:
        x = target_near_2d(curve, s0, c * math.sqrt(eps))
        jets, r = coupled_jets(kind, curve, densities, x)
        ref, e = O.coupled_local_heat_series(kind, geometry, densities, coef, x, eps, return_error=True)
        errs.append([float(np.max(np.abs(COUPLED_LOCAL[kind](jets, coef, SplitParams(eps, P, r)) - ref)))
                     for P in orders])
        oerr.append(e)
    return np.array(errs), np.array(oerr)


def split_difference(kind, geometry, density, eps, P=3, where=None, hfac=1.2, max_nodes=2 ** 22):
    """|T(eps) - T(eps/4)| with T = local(P) + history, target at r = sqrt(eps)."""
    bnd = _boundary(geometry)
    dim = 3 if isinstance(bnd, geo.Surface3D) else 2
    where = where if where is not None else ((0.1, 0.3) if dim == 3 else 0.3)
    x = target_near_3d(bnd, where, math.sqrt(eps)) if dim == 3 else target_near_2d(bnd, where, math.sqrt(eps))
    src = O.SourceDescriptor(kind, geometry, density, dim)
    loc = local_3d if dim == 3 else local_2d
    tot = []
    for e in (eps, eps / 4):
        hist = H.history_potential_poisson(src, x, e, h=hfac * math.sqrt(e), max_nodes=max_nodes)
        tot.append(loc(kind, x, bnd, density, [SplitParams(e, P)])[0] + hist)
    return abs(tot[0] - tot[1])


def split_invariance_ratio(kind, geometry, density, eps0, P=3, **kw):
    """D(eps0) / D(eps0/4) for the difference above; tends to 4^((P+1)/2)."""
    d0 = split_difference(kind, geometry, density, eps0, P, **kw)
    d1 = split_difference(kind, geometry, density, eps0 / 4, P, **kw)
    return d0 / d1, d0, d1


# ----------------------------------------------------------------------------
# special functions
# ----------------------------------------------------------------------------
Q_GRID_C = (0.05, 0.5, 1.0, 2.0, 4.0)


def q_moment_quadrature(p, c):
    """int_c^inf exp(-x^2) x^-p dx by adaptive quadrature on dyadic panels."""
    f = lambda x: math.exp(-x * x) * x ** (-p)
    br = [c * 2.0 ** k for k in range(12) if c * 2.0 ** k < 6.0] + [6.0]
    val = sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-13, limit=200)[0] for a, b in zip(br, br[1:]))
    return val + integrate.quad(f, br[-1], np.inf, epsabs=0, epsrel=1e-13)[0]


def _quiet(func):
    # parity-zero parts trigger QUADPACK roundoff warnings; the comparison itself judges accuracy
    def wrapped(*a):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return func(*a)
    wrapped.__doc__ = func.__doc__
    return wrapped


@_quiet
def i_n_quadrature(n, c):
    """int eta^n exp(-eta^2) exp(i eta c) d eta by adaptive quadrature (|eta| <= 12 suffices)."""
    g = lambda e: e ** n * math.exp(-e * e)
    kw = dict(epsabs=1e-15, epsrel=1e-13, limit=400)
    if c == 0.0:
        return integrate.quad(g, -12.0, 12.0, **kw)[0] + 0j
    re = integrate.quad(g, -12.0, 12.0, weight="cos", wvar=c, **kw)[0]
    im = integrate.quad(g, -12.0, 12.0, weight="sin", wvar=c, **kw)[0]
    return re + 1j * im


@_quiet
def w_n_quadrature(n):
    """The double integral for w_n, inner integral over eta done first."""
    inner = lambda u: integrate.quad(lambda e: math.exp(-e * e), -12.0, 12.0, weight="cos", wvar=u,
                                     epsabs=1e-15, epsrel=1e-13, limit=400)[0]
    return integrate.quad(lambda u: u ** n * inner(u), -40.0, 40.0, points=[0.0], epsabs=1e-13, epsrel=1e-12,
                          limit=400)[0]


def specfun_errors(ps=range(-2, 11), cs=Q_GRID_C, ns=range(0, 9)):
    """(max q_moment rel. error, max recursion residual, max I_n rel. error)."""
    q = max(abs(sf.q_moment(p, c) - q_moment_quadrature(p, c)) / abs(q_moment_quadrature(p, c))
            for p in ps for c in cs)
    rec = max(sf.q_recursion_residual(p, c) for p in ps for c in cs)
    i_n = 0.0
    for n in ns:
        for c in (0.0,) + tuple(cs):
            ref = i_n_quadrature(n, c)
            i_n = max(i_n, abs(sf.fourier_gaussian_moment(n, c) - ref) / max(abs(ref), 1e-300))
    return q, rec, i_n


# ----------------------------------------------------------------------------
# coupled identities
# ----------------------------------------------------------------------------
def random_admissible(rng):
    """alpha = C beta with C > 0 and alpha3 beta3 < 0 (analytically admissible)."""
    beta = rng.normal(size=2)
    cfac = rng.uniform(0.2, 2.0)
    a3 = rng.uniform(0.1, 2.0)
    return C.CouplingCoefficients(tuple(cfac * beta), tuple(beta), a3, -rng.uniform(0.1, 2.0))


def factorization_error(coef, eta, z):
    """expm(-M(eta/z) z^2) against exp(-|eta|^2) expm(-R(eta, z)); dense expm on the left."""
    lhs = linalg.expm(-C.symbol_matrix(coef, np.asarray(eta) / z) * z * z)
    rhs = math.exp(-float(np.dot(eta, eta))) * C.expm2(-C.factorization_remainder(coef, eta, z)[None])[0]
    return float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(lhs)), 1e-300))


def closed_form_integral_error(coef, xi, eps):
    """int_0^eps e^{-Mt} dt: closed form M^-1 (I - e^{-M eps}) vs adaptive quadrature."""
    M = C.symbol_matrix(coef, np.asarray(xi, dtype=float))
    ref, _ = integrate.quad_vec(lambda t: linalg.expm(-M * t), 0.0, eps, epsabs=1e-16, epsrel=1e-13)
    closed = np.linalg.solve(M, np.eye(2) - C.expm2(-M[None] * eps)[0])
    aug = C.local_symbol_integral(coef, np.asarray(xi, dtype=float), eps)
    scale = max(np.max(np.abs(ref)), 1e-300)
    return float(max(np.max(np.abs(closed - ref)), np.max(np.abs(aug - ref))) / scale)


def swapped_jets(jets):
    return C.CoupledJets(jets.geom, f1=jets.f2, f2=jets.f1, sigma1=jets.sigma2, sigma2=jets.sigma1,
                         mu1=jets.mu2, mu2=jets.mu1)


def decoupled_errors(jets, sp):
    """Coefficient-wise |coupled - scalar| with zero coupling for VP, SLP, DLP."""
    zero = C.CouplingCoefficients()
    g = jets.geom
    out = {}
    pairs = {
        "volume": (C.coupled_vol_coefficients(jets, zero, sp.c),
                   (E2.vol_coefficients_2d(jets.f1, g, sp.c), E2.vol_coefficients_2d(jets.f2, g, sp.c))),
        "single": (C.coupled_slp_coefficients(jets, zero, sp.c),
                   (E2.slp_coefficients_2d(jets.sigma1, g, sp.c), E2.slp_coefficients_2d(jets.sigma2, g, sp.c))),
        # coupled "table" double layer carries the opposite sign of the canonical scalar coefficients
        "double": (C.coupled_dlp_coefficients(jets, zero, sp.c),
                   ([-a for a in E2.dlp_coefficients_2d(jets.mu1, g, sp.c)],
                    [-a for a in E2.dlp_coefficients_2d(jets.mu2, g, sp.c)])),
    }
    for kind, (cpl, sca) in pairs.items():
        err = 0.0
        for comp in range(2):
            for a, b in zip(cpl[comp], sca[comp]):
                err = max(err, float(np.max(np.abs(np.asarray(a) - np.asarray(b)))))
        out[kind] = err
    return out
