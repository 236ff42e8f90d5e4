"""Green's-identity validation, convergence studies and self-tests.

For a manufactured u on a domain with boundary, the free-space representation

    u = V[-lap u] + S[du/dnu] - D[u]      (interior targets)

is evaluated with every potential split into its local part (asymptotic
expansion at the target's closest boundary point) and its history part
(smoothed-kernel quadrature).  With eps = (alpha_eps h)^2 the error at
truncation level P behaves like h^(P+1).
"""
from dataclasses import dataclass, field, fields, replace
import csv
import logging
import math
import time

import numpy as np

from . import expansions2d as E2
from . import expansions3d as E3
from . import geometry as geo
from . import history as H
from .expansions2d import SplitParams
from .manufactured import ManufacturedSolution, SOLUTIONS, circle_normal_field, torus_normal_field

log = logging.getLogger("heatsplit")

FIGURE_H = (4.936536597953740e-02, 4.442882938158366e-02, 3.417602260121820e-02, 3.173487812970262e-02,
            2.776801836348979e-02, 2.338359441135982e-02, 2.221441469079183e-02, 1.851201224232652e-02,
            1.708801130060910e-02, 1.480960979386122e-02, 1.269395125188105e-02, 1.083629984916675e-02,
            9.658441169909491e-03, 8.382797996525219e-03)
FIGURE_ERR = {
    2: (1.888942787154664e-01, 1.493622181226736e-01, 7.978125032027909e-02, 6.614995553004702e-02,
        4.672018660425230e-02, 2.935035653254301e-02, 2.546015318764789e-02, 1.519078171250108e-02,
        1.213752951199591e-02, 8.087514609633941e-03, 5.191257739730585e-03, 3.274946860912651e-03,
        2.335086995940257e-03, 1.534174662125217e-03),
    3: (1.633416326247415e-01, 1.080922816651702e-01, 3.772023296230041e-02, 2.788192827547676e-02,
        1.611698633890598e-02, 7.929098538088895e-03, 6.414116715716092e-03, 3.020860831829677e-03,
        2.185696546150119e-03, 1.228866706843361e-03, 6.635760005370665e-04, 3.542957616701091e-04,
        2.252800124398748e-04, 1.323911977160450e-04),
}
CSV_COLUMNS = ("h", "eps", "P", "max_rel_err", "err_V", "err_S", "err_D", "seconds")
MAX_ORDER = {"poisson2d": 4, "poisson3d": 3}


class ConfigError(ValueError):
    """Invalid or unsupported run configuration (CLI exit status 2)."""


# ----------------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------------
@dataclass
class RunConfig:
    equation: str = "poisson3d"
    geometry: str = "torus"
    major_radius: float = 0.5
    minor_radius: float = 0.3
    radius: float = 1.0
    solution: str = "torus"
    alpha_eps: float = 1.0
    p: int = 2
    targets: int = 1000
    max_distance: float = 0.03
    h_values: tuple = FIGURE_H
    output: str = "convergence.csv"
    seed: int = 0
    full: bool = False
    ref_eps: float = 1e-4
    tolerance: float = 0.1
    timing: bool = True

    def check(self):
        if self.equation not in MAX_ORDER:
            if self.equation == "coupled2d":
                raise ConfigError("coupled2d has no Green's representation to validate; "
                                  "its expansions are exercised by selftest, expand and oracle")
            raise ConfigError("unknown equation %r" % self.equation)
        want = {"poisson3d": "torus", "poisson2d": "disc"}[self.equation]
        if self.geometry != want:
            raise ConfigError("%s runs on geometry %r" % (self.equation, want))
        if self.solution not in SOLUTIONS or SOLUTIONS[self.solution][1] != int(self.equation[-2]):
            raise ConfigError("solution %r does not fit %s" % (self.solution, self.equation))
        if not 0 <= self.p <= MAX_ORDER[self.equation]:
            raise ConfigError("P must lie in [0, %d] for %s" % (MAX_ORDER[self.equation], self.equation))
        if self.alpha_eps <= 0 or self.targets < 1 or self.ref_eps <= 0:
            raise ConfigError("alpha_eps, targets and ref_eps must be positive")
        limit = self.minor_radius if self.equation == "poisson3d" else self.radius
        if not 0 < self.max_distance < limit:
            raise ConfigError("max_distance must lie in (0, %g)" % limit)
        if any(h <= 0 for h in self.h_values):
            raise ConfigError("h values must be positive")
        return self

    def eps(self, h):
        return (self.alpha_eps * h) ** 2

    def active_h(self):
        """h values in descending order; the finest one only with ``full``."""
        hs = sorted(set(float(h) for h in self.h_values), reverse=True)
        return hs if self.full or len(hs) < 2 else hs[:-1]


def _convert(name, text):
    ftype = {f.name: f for f in fields(RunConfig)}[name]
    default = ftype.default
    try:
        if isinstance(default, bool):
            low = str(text).strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(text)
            return low in ("1", "true", "yes")
        if isinstance(default, tuple):
            return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())
        return type(default)(text)
    except ValueError:
        raise ConfigError("bad value for %s: %r" % (name, text))


def parse_config_text(text):
    """key=value lines with # comments -> dict of raw strings."""
    out = {}
    for num, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected key = value" % num)
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in {f.name for f in fields(RunConfig)}:
            raise ConfigError("line %d: unknown key %r" % (num, key))
        out[key] = val
    return out


def make_config(file_values=None, overrides=None):
    """RunConfig from file values overridden by flag values (both raw or typed)."""
    kw = {}
    for src in (file_values or {}, overrides or {}):
        for k, v in src.items():
            if v is None:
                continue
            kw[k] = _convert(k, v) if isinstance(v, str) else v
    try:
        return RunConfig(**kw).check()
    except TypeError as exc:
        raise ConfigError(str(exc))


def load_config(path, overrides=None):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("cannot read config: %s" % exc)
    return make_config(parse_config_text(text), overrides)


# ----------------------------------------------------------------------------
# problem setup (targets, jets and references are independent of h)
# ----------------------------------------------------------------------------
@dataclass
class Problem:
    cfg: RunConfig
    dim: int
    domain: object
    boundary: object
    solution: ManufacturedSolution
    dudn: object
    targets: np.ndarray
    r: np.ndarray
    jets: list
    sigma_jets: list
    mu_jets: list
    f_jets: list
    truth: np.ndarray
    scale: float
    refs: dict = field(default_factory=dict)
    history_cache: dict = field(default_factory=dict)


def _sample_torus(cfg, rng, surf):
    out = []
    while len(out) < cfg.targets:
        s, t = rng.random(2)
        depth = cfg.max_distance * (1.0 - rng.random())
        b, _, _, nout = surf.frame(s, t)
        x = b - depth * nout
        try:
            b2, r, side, st = geo.closest_point_surface(surf, x)
        except geo.AmbiguousProjectionError:
            log.info("ambiguous projection for a sampled target; resampling")
            continue
        if side >= 0 or r > cfg.max_distance:
            continue
        out.append((x, r, st))
    return out


def _sample_disc(cfg, rng, curve):
    out = []
    while len(out) < cfg.targets:
        s = rng.random()
        depth = cfg.max_distance * (1.0 - rng.random())
        b = np.asarray(curve(s), dtype=float)
        x = b - depth * np.asarray(curve.outward_normal(s), dtype=float)
        try:
            s2, b2, r, side = geo.closest_point_curve(curve, x)
        except geo.AmbiguousProjectionError:
            log.info("ambiguous projection for a sampled target; resampling")
            continue
        if side >= 0 or r > cfg.max_distance:
            continue
        out.append((x, r, s2))
    return out


def build_problem(cfg):
    cfg.check()
    rng = np.random.default_rng(cfg.seed)
    func, dim = SOLUTIONS[cfg.solution]
    u = ManufacturedSolution(func, cfg.solution, dim)
    jets, sj, mj, fj, xs, rs = [], [], [], [], [], []
    if cfg.equation == "poisson3d":
        dom = geo.SolidTorus(cfg.major_radius, cfg.minor_radius)
        bnd = dom.boundary
        dudn = u.normal_derivative(torus_normal_field(cfg.major_radius, cfg.minor_radius))
        for x, r, st in _sample_torus(cfg, rng, bnd):
            jet = geo.graph_jet_3d(bnd, *st, x=x)
            jets.append(jet)
            sj.append(geo.density_jet_3d(bnd, *st, dudn))
            mj.append(geo.density_jet_3d(bnd, *st, u))
            fj.append(geo.volume_jet_3d(u.source, x, jet.e1, jet.e2, jet.normal, 2))
            xs.append(x)
            rs.append(r)
    else:
        dom = geo.Disc(cfg.radius)
        bnd = dom.boundary
        dudn = u.normal_derivative(circle_normal_field(cfg.radius))
        for x, r, s in _sample_disc(cfg, rng, bnd):
            jet = geo.graph_jet_2d(bnd, s, x)
            jets.append(jet)
            sj.append(geo.density_jet_2d(bnd, s, dudn, order=4))
            mj.append(geo.density_jet_2d(bnd, s, u, order=4))
            fj.append(geo.volume_jet_2d(u.source, x, jet.tangent, jet.normal, 2))
            xs.append(x)
            rs.append(r)
    X = np.array(xs)
    truth = u.values(X)
    return Problem(cfg, dim, dom, bnd, u, dudn, X, np.array(rs), jets, sj, mj, fj, truth,
                   float(np.max(np.abs(truth))))


# ----------------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------------
def _local_parts(problem, eps, P):
    """Local V, S, D (canonical signs) at every target."""
    V, S, D = (np.empty(len(problem.r)) for _ in range(3))
    for i, (jet, sj, mj, fj, r) in enumerate(zip(problem.jets, problem.sigma_jets, problem.mu_jets,
                                                   problem.f_jets, problem.r)):
        sp = SplitParams(eps, P, r)
        if problem.dim == 3:
            V[i] = E3.vol_local_3d(fj, jet, sp) if P >= 2 else 0.0
            S[i] = E3.slp_local_3d(sj, jet, sp) if P >= 1 else 0.0
            D[i] = E3.dlp_local_3d(mj, jet, sp)
        else:
            V[i] = E2.vol_local_2d(fj, jet, sp) if P >= 2 else 0.0
            S[i] = E2.slp_local_2d(sj, jet, sp, "canonical") if P >= 1 else 0.0
            D[i] = E2.dlp_local_2d(mj, jet, sp, "canonical")
    return V, S, D


def _boundary_values(problem, nodes):
    p = nodes.points.T
    u = problem.solution
    grad = u.gradient(*p)
    sigma = sum(grad[k] * nodes.normals[:, k] for k in range(problem.dim))
    return sigma, u.values(nodes.points)


def _history_parts(problem, eps, h, which=("V", "S", "D")):
    key = (eps, h, which)
    if key in problem.history_cache:
        return problem.history_cache[key]
    out = {}
    if "S" in which or "D" in which:
        bn = H.boundary_nodes(problem.boundary, h)
        sigma, mu = _boundary_values(problem, bn)
        if "S" in which:
            out["S"] = H.history_sum(problem.dim, "single", bn, sigma, problem.targets, eps)
        if "D" in which:
            out["D"] = H.history_sum(problem.dim, "dipole", bn, mu, problem.targets, eps)
    if "V" in which:
        vn = H.volume_nodes(problem.domain, h)
        f = problem.solution.source(*vn.points.T)
        out["V"] = H.history_sum(problem.dim, "single", vn, f, problem.targets, eps)
    problem.history_cache[key] = out
    return out


def layer_references(problem):
    """Accurate S and D at the targets (small eps, highest order, fine rule)."""
    if not problem.refs:
        eps = problem.cfg.ref_eps
        hist = _history_parts(problem, eps, math.sqrt(eps) / 1.2, which=("S", "D"))
        _, S, D = _local_parts(problem, eps, MAX_ORDER[problem.cfg.equation])
        problem.refs = {"S": S + hist["S"], "D": D + hist["D"]}
    return problem.refs


@dataclass
class ConvergenceRow:
    h: float
    eps: float
    P: int
    max_rel_err: float
    err_V: float
    err_S: float
    err_D: float
    seconds: float

    def as_tuple(self):
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


def greens_identity_eval(cfg, h, problem=None, orders=None):
    """ConvergenceRow(s) for one h.  With ``orders`` a list of rows is returned.

    Errors are relative to max |u| over the targets.  The per-potential errors
    use accurate layer references; the volume reference closes the identity,
    so err_V + err_S + err_D bounds the total error.
    """
    problem = problem or build_problem(cfg)
    eps = cfg.eps(h)
    t0 = time.perf_counter()
    hist = _history_parts(problem, eps, h)
    t_hist = time.perf_counter() - t0
    refs = layer_references(problem)
    v_ref = problem.truth - refs["S"] + refs["D"]
    rows = []
    for P in (orders or [cfg.p]):
        t1 = time.perf_counter()
        V, S, D = _local_parts(problem, eps, P)
        V, S, D = V + hist["V"], S + hist["S"], D + hist["D"]
        total = V + S - D
        sc = problem.scale
        sec = t_hist + time.perf_counter() - t1 if cfg.timing else 0.0
        rows.append(ConvergenceRow(h, eps, P, float(np.max(np.abs(total - problem.truth)) / sc),
                                   float(np.max(np.abs(V - v_ref)) / sc), float(np.max(np.abs(S - refs["S"])) / sc),
                                   float(np.max(np.abs(D - refs["D"])) / sc), sec))
    return rows if orders is not None else rows[0]


@dataclass
class StudyResult:
    P: int
    rows: list
    slope: float
    band: tuple
    passed: bool
    monotone: bool


def fit_slope(hs, errs):
    """Least-squares slope of log(err) against log(h)."""
    hs, errs = np.asarray(hs, dtype=float), np.asarray(errs, dtype=float)
    if len(hs) < 2 or np.any(errs <= 0):
        raise ValueError("need at least two positive errors to fit a slope")
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


def slope_band(P):
    return (P + 1 - 0.5, P + 1 + 0.8)


def convergence_study(cfg, problem=None, orders=None, progress=None):
    """Rows for every active h (descending) and the fitted slope per order."""
    hs = cfg.active_h()
    if len(hs) < 4 or hs[0] / hs[-1] < 3.0:
        raise ConfigError("a study needs at least 4 h values spanning a factor of 3")
    problem = problem or build_problem(cfg)
    orders = list(orders or [cfg.p])
    per = {P: [] for P in orders}
    for h in hs:
        for row in greens_identity_eval(cfg, h, problem, orders):
            per[row.P].append(row)
            if progress:
                progress(row)
        problem.history_cache.clear()
    results = []
    for P in orders:
        rows = per[P]
        errs = [r.max_rel_err for r in rows]
        monotone = all(a >= b for a, b in zip(errs, errs[1:]))
        if not monotone:
            log.warning("P=%d: error is not monotone in h", P)
        slope = fit_slope([r.h for r in rows], errs)
        band = slope_band(P)
        results.append(StudyResult(P, rows, slope, band, band[0] <= slope <= band[1], monotone))
    return results


def write_csv(path, rows):
    rows = sorted(rows, key=lambda r: -r.h)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(["%.15e" % r.h, "%.15e" % r.eps, "%d" % r.P] +
                       ["%.15e" % getattr(r, c) for c in CSV_COLUMNS[3:]])


def read_csv(path):
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        return [ConvergenceRow(float(d["h"]), float(d["eps"]), int(d["P"]), *(float(d[c]) for c in CSV_COLUMNS[3:]))
                for d in rd]


def study_report(result):
    lo, hi = result.band
    lines = ["P = %d" % result.P,
             "fitted slope = %.4f (band [%.1f, %.1f]) %s" % (result.slope, lo, hi, "PASS" if result.passed else "FAIL")]
    if not result.monotone:
        lines.append("warning: error not monotone in h")
    for r in result.rows:
        lines.append("h = %.6e  eps = %.6e  err = %.6e" % (r.h, r.eps, r.max_rel_err))
    return "\n".join(lines) + "\n"


def figure_value(P, h, rtol=1e-3):
    """Published error at (P, h) when h is one of the figure abscissae."""
    for hf, e in zip(FIGURE_H, FIGURE_ERR.get(P, ())):
        if abs(h - hf) <= rtol * hf:
            return e
    return None
