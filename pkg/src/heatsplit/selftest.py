"""Self-test suites and the pass/fail matrix behind ``heatsplit selftest``."""
from contextlib import contextmanager
from dataclasses import dataclass
import math
import time

import numpy as np

from . import checks as K
from . import coupled as C
from . import expansions2d as E2
from . import expansions3d as E3
from . import geometry as geo
from . import specfun as sf
from .expansions2d import SplitParams

# name -> (module, coefficient function, index of the perturbed coefficient)
PERTURBATIONS = {
    "slp2d": (E2, "slp_coefficients_2d", 0),
    "dlp2d": (E2, "dlp_coefficients_2d", 0),
    "vol2d": (E2, "vol_coefficients_2d", 0),
    "slp3d": (E3, "slp_coefficients_3d", 0),
    "dlp3d": (E3, "dlp_coefficients_3d", 0),
    "vol3d": (E3, "vol_coefficients_3d", 0),
    "coupled_slp": (C, "_slp_component", 0),
    "coupled_dlp": (C, "_dlp_component", 0),
    "coupled_vol": (C, "_vol_component", 0),
}
PERTURB_SIZE = 1e-6


@contextmanager
def perturbed(name, size=PERTURB_SIZE):
    """Temporarily add ``size`` to one tabulated coefficient (debug hook)."""
    if name is None:
        yield
        return
    if name not in PERTURBATIONS:
        raise KeyError("unknown perturbation %r (choose from %s)" % (name, ", ".join(PERTURBATIONS)))
    mod, fname, idx = PERTURBATIONS[name]
    orig = getattr(mod, fname)

    def bumped(*a, **kw):
        out = list(orig(*a, **kw))
        out[idx] = out[idx] + size
        return out

    setattr(mod, fname, bumped)
    try:
        yield
    finally:
        setattr(mod, fname, orig)


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def _orders_check(suite, label, eps, errs, orders, tol=0.4):
    out = []
    for j, P in enumerate(orders):
        slope = K.fitted_order(eps, errs[:, j])
        want = (P + 1) / 2
        out.append(Check(suite, "%s P=%d" % (label, P), slope >= want - tol,
                         "slope %.2f (nominal %.1f)" % (slope, want)))
    return out


FINE_EPS = (1e-4, 2.5e-5)


def _fine_check(suite, label, kind, geom, dens, orders):
    # a 1e-6 change in a low-order coefficient dominates the truncation error only at small eps
    P = max(orders)
    errs, _ = K.expansion_errors(kind, geom, dens, FINE_EPS, orders=(P,))
    return _orders_check(suite, "%s fine eps" % label, FINE_EPS, errs, (P,))


def suite_specfun(quick):
    s = "specfun"
    cs = (0.5, 2.0) if quick else K.Q_GRID_C
    q, rec, i_n = K.specfun_errors(ps=range(-2, 11, 3 if quick else 1), cs=cs, ns=range(0, 9, 2 if quick else 1))
    out = [Check(s, "Q_p vs quadrature", q <= 1e-11, "max rel %.1e" % q),
           Check(s, "Q_p recursion", rec <= 1e-12, "max rel %.1e" % rec),
           Check(s, "I_n vs quadrature", i_n <= 1e-11, "max rel %.1e" % i_n)]
    if not quick:
        w = max(abs(sf.gaussian_moment_w(n) - K.w_n_quadrature(n)) / max(sf.gaussian_moment_w(n), 1.0)
                for n in range(7))
        out.append(Check(s, "w_n vs quadrature", w <= 1e-8, "max rel %.1e" % w))
    return out


def suite_geometry(quick):
    s = "geometry"
    circ = geo.circle()
    jet = geo.graph_jet_2d(circ, 0.3)
    ell = geo.graph_jet_2d(geo.ellipse(2.0, 1.0), 0.0)
    tj = geo.graph_jet_3d(geo.torus(0.5, 0.3), 0.0, 0.0)
    b, r, side, _ = geo.closest_point_torus(0.5, 0.3, [0.75, 0.0, 0.0])
    return [
        Check(s, "circle jet", abs(jet.kappa - 1) + abs(jet.g3) + abs(jet.g4 - 3) < 1e-10,
              "kappa %.12f g3 %.1e g4 %.12f" % (jet.kappa, jet.g3, jet.g4)),
        Check(s, "ellipse apex curvature", abs(ell.kappa - 2) < 1e-10, "kappa %.12f" % ell.kappa),
        Check(s, "torus principal curvatures", abs(tj.kappa1 - 10 / 3) + abs(tj.kappa2 - 1.25) < 1e-10,
              "%.12f %.12f" % (tj.kappa1, tj.kappa2)),
        Check(s, "torus projection", np.allclose(b, [0.8, 0, 0], atol=1e-14) and abs(r - 0.05) < 1e-14 and side == -1,
              "r %.3e side %d" % (r, side)),
    ]


def suite_expansions2d(quick):
    s = "expansions2d"
    eps = K.EPS_LADDER[:2] if quick else K.EPS_LADDER
    out = []
    for kind, geom, dens in (("single", geo.circle(), K.sigma_2d), ("double", geo.circle(), K.mu_2d),
                             ("volume", geo.Disc(), K.f_2d)):
        errs, _ = K.expansion_errors(kind, geom, dens, eps)
        out += _orders_check(s, kind, eps, errs, K.ORDERS_2D[kind])
        out += _fine_check(s, kind, kind, geom, dens, K.ORDERS_2D[kind])
    sp = SplitParams(1e-3, 4, 25 * math.sqrt(1e-3))
    v = E2.vol_local_2d({(0, 0): 1.0}, geo.GeometryJet2D(b=np.zeros(2), r=sp.r, side=-1), sp)
    out.append(Check(s, "volume interior limit", abs(v - 1e-3) <= 1e-13, "%.3e" % abs(v - 1e-3)))
    return out


def suite_expansions3d(quick):
    s = "expansions3d"
    eps = K.EPS_LADDER[:2] if quick else K.EPS_LADDER
    cases = [("single", geo.sphere(), K.density_3d), ("double", geo.sphere(), K.density_3d),
             ("volume", geo.Ball(), K.f_3d)]
    if not quick:
        cases += [("single", geo.torus(), K.density_3d), ("double", geo.torus(), K.density_3d),
                  ("volume", geo.SolidTorus(), K.f_3d)]
    out = []
    for kind, geom, dens in cases:
        errs, _ = K.expansion_errors(kind, geom, dens, eps)
        label = "%s %s" % (kind, type(geom).__name__.strip("_").lower())
        out += _orders_check(s, label, eps, errs, K.ORDERS_3D[kind])
        out += _fine_check(s, label, kind, geom, dens, K.ORDERS_3D[kind])
    return out


def suite_coupled(quick):
    s = "coupled"
    rng = np.random.default_rng(1)
    fac = max(K.factorization_error(K.random_admissible(rng), rng.normal(size=2), rng.uniform(0.01, 0.3))
              for _ in range(10 if quick else 50))
    cf = max(K.closed_form_integral_error(K.DEFAULT_COUPLING, (xi, 0.3 * xi), 1e-2) for xi in (0.0, 0.5, 5.0, 50.0))
    curve = geo.circle()
    x = K.target_near_2d(curve, 0.7, 0.03)
    out = [Check(s, "factorization identity", fac <= 1e-11, "max rel %.1e" % fac),
           Check(s, "closed-form local integral", cf <= 1e-11, "max rel %.1e" % cf)]
    for kind in ("volume", "single", "double"):
        jets, r = K.coupled_jets(kind, curve, K.coupled_pair(), x)
        sp = SplitParams(1e-3, max(K.ORDERS_COUPLED[kind]), r)
        a = K.COUPLED_LOCAL[kind](jets, K.DEFAULT_COUPLING, sp)
        b = K.COUPLED_LOCAL[kind](K.swapped_jets(jets), K.DEFAULT_COUPLING.swapped(), sp)
        out.append(Check(s, "swap symmetry %s" % kind, bool(np.all(a == b[::-1])), "diff %.1e" % np.max(np.abs(a - b[::-1]))))
    dec = K.decoupled_errors(K.coupled_jets("single", curve, K.coupled_pair(), x)[0], SplitParams(1e-3, 4, 0.03))
    decv = K.decoupled_errors(K.coupled_jets("volume", curve, K.coupled_pair(), x)[0], SplitParams(1e-3, 4, 0.03))
    for kind in ("single", "double"):
        out.append(Check(s, "decoupled limit %s" % kind, dec[kind] <= 1e-13, "%.1e" % dec[kind]))
    out.append(Check(s, "decoupled limit volume", decv["volume"] <= 1e-13, "%.1e" % decv["volume"]))
    if not quick:
        for kind, geom in (("single", curve), ("double", curve), ("volume", geo.Disc())):
            errs, _ = K.coupled_expansion_errors(kind, geom)
            out += _orders_check(s, "%s vs heat series" % kind, K.EPS_LADDER, errs, K.ORDERS_COUPLED[kind])
    return out


def suite_split(quick):
    s = "split invariance"
    cases = [("single", geo.circle(), K.sigma_2d, {})]
    if not quick:
        cases += [("double", geo.circle(), K.mu_2d, {}), ("volume", geo.Disc(), K.f_2d, {}),
                  ("single", geo.torus(), K.density_3d, {}), ("double", geo.torus(), K.density_3d, {}),
                  ("volume", geo.SolidTorus(), K.f_3d, {})]
    out = []
    for kind, geom, dens, kw in cases:
        ratio, d0, d1 = K.split_invariance_ratio(kind, geom, dens, 4e-3, **kw)
        out.append(Check(s, "%s %s P=3" % (kind, type(geom).__name__.lower()), ratio >= 8.0,
                         "ratio %.1f (needs >= 8)" % ratio))
    return out


def suite_harness(quick):
    from . import harness as Hn
    s = "harness"
    cfg = Hn.RunConfig(solution="constant", targets=10 if quick else 50, p=3, alpha_eps=1.0)
    row = Hn.greens_identity_eval(cfg, 2.5e-2)
    return [Check(s, "constant solution (-D[1] = 1 inside)", row.max_rel_err < 1e-4,
                  "max rel %.1e" % row.max_rel_err)]


SUITES = [("specfun", suite_specfun), ("geometry", suite_geometry), ("expansions2d", suite_expansions2d),
          ("expansions3d", suite_expansions3d), ("coupled", suite_coupled), ("split", suite_split),
          ("harness", suite_harness)]


def selftest(quick=False, perturb=None, suites=None, echo=print):
    """Run the suites, print a pass/fail matrix and return (all passed, checks)."""
    checks = []
    with perturbed(perturb):
        for name, fn in SUITES:
            if suites and name not in suites:
                continue
            t0 = time.perf_counter()
            try:
                res = fn(quick)
            except Exception as exc:  # a crashing suite is a failing suite
                res = [Check(name, "suite raised", False, "%s: %s" % (type(exc).__name__, exc))]
            checks += res
            ok = all(c.passed for c in res)
            echo("%-14s %s  (%d checks, %.1fs)" % (name, "PASS" if ok else "FAIL", len(res), time.perf_counter() - t0))
            for c in res:
                if not c.passed:
                    echo("    FAIL %s: %s" % (c.name, c.detail))
    passed = all(c.passed for c in checks)
    echo("selftest %s" % ("PASS" if passed else "FAIL"))
    return passed, checks
