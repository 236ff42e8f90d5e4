"""Command line: selftest, expand, oracle, validate, study.

Exit status 0 on PASS, 1 on a failed check, 2 on a configuration error.
"""
import argparse
from dataclasses import fields
import logging
import math
import os
import sys

import numpy as np

from . import checks as K
from . import expansions2d as E2
from . import expansions3d as E3
from . import geometry as geo
from . import harness as Hn
from . import oracle as O

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
KINDS = {"single": "slp", "double": "dlp", "volume": "vol"}
LAYER_GEOMETRIES = {"circle": "disc", "ellipse": None, "sphere": "ball", "torus": "solid_torus"}
VOLUME_GEOMETRIES = {"disc": "circle", "ball": "sphere", "solid_torus": "torus"}


def _preset(name, kind, dim):
    if name == "constant":
        return (lambda x, y: 1.0 + 0.0 * x) if dim == 2 else (lambda x, y, z: 1.0 + 0.0 * x)
    if name != "smooth":
        raise Hn.ConfigError("unknown density preset %r" % name)
    if dim == 3:
        return K.f_3d if kind == "volume" else K.density_3d
    return {"single": K.sigma_2d, "double": K.mu_2d, "volume": K.f_2d}[kind]


def _point_setup(args):
    """(geometry for the source, boundary, dim, target, density)."""
    g = args.geometry
    if args.kind == "volume":
        if g not in VOLUME_GEOMETRIES:
            raise Hn.ConfigError("volume potentials need geometry disc, ball or solid_torus")
    elif g not in LAYER_GEOMETRIES:
        raise Hn.ConfigError("layer potentials need geometry circle, ellipse, sphere or torus")
    geom = K.GEOMETRIES[g]()
    bnd = getattr(geom, "boundary", geom)
    dim = 3 if isinstance(bnd, geo.Surface3D) else 2
    where = [float(v) for v in (args.at or ("0.1,0.3" if dim == 3 else "0.3")).split(",")]
    if len(where) != dim - 1:
        raise Hn.ConfigError("--at takes %d parameter value(s) for this geometry" % (dim - 1))
    if args.distance < 0:
        raise Hn.ConfigError("--distance must be non-negative")
    x = K.target_near_3d(bnd, where, args.distance) if dim == 3 else K.target_near_2d(bnd, where[0], args.distance)
    return geom, bnd, dim, x, _preset(args.density, args.kind, dim)


def _expansion(args, bnd, dim, x, dens):
    """Coefficient table [(p, A_p)] and the local sum at P."""
    if dim == 2:
        s, b, r, side = geo.closest_point_curve(bnd, x)
        jet = geo.graph_jet_2d(bnd, s, x)
        data = (geo.volume_jet_2d(dens, x, jet.tangent, jet.normal, 2) if args.kind == "volume"
                else geo.density_jet_2d(bnd, s, dens, order=4))
        conv = "table" if args.kind == "volume" else args.convention
        table = E2.coefficient_table_2d(KINDS[args.kind], data, jet, r / math.sqrt(args.eps), conv)
    else:
        b, r, side, st = geo.closest_point_surface(bnd, x)
        jet = geo.graph_jet_3d(bnd, *st, x=x)
        data = (geo.volume_jet_3d(dens, x, jet.e1, jet.e2, jet.normal, 2) if args.kind == "volume"
                else geo.density_jet_3d(bnd, *st, dens, order=2))
        table = E3.coefficient_table_3d(KINDS[args.kind], data, jet, r / math.sqrt(args.eps))
    if not 0 <= args.p <= table[-1][0]:
        raise E2.UnsupportedOrderError("P must lie in [0, %d] for this potential" % table[-1][0])
    total = sum(args.eps ** (p / 2) * float(a) for p, a in table if p <= args.p)
    return table, total, r


def cmd_expand(args):
    geom, bnd, dim, x, dens = _point_setup(args)
    table, total, r = _expansion(args, bnd, dim, x, dens)
    print("target = %s  r = %.6e  c = %.6e" % (np.array2string(x, precision=10), r, r / math.sqrt(args.eps)))
    for p, a in table:
        print("A_%d = % .15e" % (p, float(a)))
    print("local(P=%d) = % .15e" % (args.p, total))
    return EXIT_PASS


def cmd_oracle(args):
    geom, bnd, dim, x, dens = _point_setup(args)
    src = O.SourceDescriptor(args.kind, geom, dens, dim)
    val, err = O.local_time_quadrature(src, x, args.eps, route=args.route, return_error=True)
    print("oracle = % .15e  (estimated error %.1e, canonical sign)" % (val, err))
    args.convention = "canonical"
    _, total, _ = _expansion(args, bnd, dim, x, dens)
    print("local(P=%d) = % .15e  difference %.3e" % (args.p, total, abs(total - val)))
    return EXIT_PASS


def _config_from(args):
    over = {f.name: getattr(args, f.name) for f in fields(Hn.RunConfig) if getattr(args, f.name, None) is not None}
    if args.config:
        return Hn.load_config(args.config, over)
    return Hn.make_config(None, over)


def cmd_validate(args):
    cfg = _config_from(args)
    h = args.h if args.h is not None else cfg.active_h()[0]
    row = Hn.greens_identity_eval(cfg, h)
    print("h = %.6e  eps = %.6e  P = %d" % (row.h, row.eps, row.P))
    print("max_rel_err = %.6e  (V %.3e, S %.3e, D %.3e)  %.1fs" % (row.max_rel_err, row.err_V, row.err_S,
                                                                   row.err_D, row.seconds))
    ref = Hn.figure_value(row.P, row.h)
    if ref is not None:
        print("published value %.6e, ratio %.3f" % (ref, row.max_rel_err / ref))
    ok = row.max_rel_err <= cfg.tolerance
    print("validate %s (tolerance %.3g)" % ("PASS" if ok else "FAIL", cfg.tolerance))
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_study(args):
    cfg = _config_from(args)
    orders = [int(v) for v in args.orders.split(",")] if args.orders else [cfg.p]
    for P in orders:
        if not 0 <= P <= Hn.MAX_ORDER[cfg.equation]:
            raise Hn.ConfigError("order %d not available for %s" % (P, cfg.equation))
    results = Hn.convergence_study(
        cfg, orders=orders,
        progress=lambda r: logging.info("h=%.4e P=%d err=%.4e", r.h, r.P, r.max_rel_err))
    Hn.write_csv(cfg.output, [row for res in results for row in res.rows])
    report = "".join(Hn.study_report(res) for res in results)
    report_path = os.path.splitext(cfg.output)[0] + ".report.txt"
    with open(report_path, "w") as fh:
        fh.write(report)
    print(report, end="")
    print("wrote %s and %s" % (cfg.output, report_path))
    return EXIT_PASS if all(r.passed for r in results) else EXIT_FAIL


def cmd_selftest(args):
    from .selftest import selftest
    passed, _ = selftest(quick=args.quick, perturb=args.perturb,
                         suites=args.suite.split(",") if args.suite else None)
    return EXIT_PASS if passed else EXIT_FAIL


def _add_point_args(p):
    p.add_argument("--kind", choices=sorted(KINDS), default="single")
    p.add_argument("--geometry", default="circle",
                   choices=sorted(set(LAYER_GEOMETRIES) | set(VOLUME_GEOMETRIES)))
    p.add_argument("--density", default="smooth", help="density preset: smooth or constant")
    p.add_argument("--at", help="closest-point parameter s (curves, default 0.3) or s,t (surfaces, default 0.1,0.3)")
    p.add_argument("--distance", type=float, default=0.02, help="target distance from the boundary")
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("-P", "--p", type=int, default=3)
    p.add_argument("--convention", choices=["table", "canonical"], default="table",
                   help="sign convention of the 2D layer potentials")


def _add_config_args(p):
    p.add_argument("--config", help="key = value file; flags override it")
    for f in fields(Hn.RunConfig):
        opts = ["--" + f.name.replace("_", "-")]
        if "_" in f.name:
            opts.append("--" + f.name)
        if f.name == "p":
            opts.append("-P")
        if isinstance(f.default, bool):
            p.add_argument(*opts, dest=f.name, nargs="?", const="true", default=None, metavar="BOOL")
        else:
            p.add_argument(*opts, dest=f.name, default=None, metavar=f.name.upper())


def build_parser():
    ap = argparse.ArgumentParser(prog="heatsplit", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("selftest", help="run the invariant suites and print a pass/fail matrix")
    p.add_argument("--quick", action="store_true", help="reduced grids (under a minute)")
    p.add_argument("--perturb", metavar="NAME", help="debug hook: bump one coefficient by 1e-6")
    p.add_argument("--suite", help="comma-separated subset of suites")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("expand", help="all A_p and the local sum at one target")
    _add_point_args(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("oracle", help="brute-force local part at one target")
    _add_point_args(p)
    p.add_argument("--route", choices=["closed", "time"], default="closed")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("validate", help="Green's identity at one h")
    _add_config_args(p)
    p.add_argument("--h", type=float, help="grid spacing (default: coarsest configured h)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("study", help="convergence study over the configured h values")
    _add_config_args(p)
    p.add_argument("--orders", help="comma-separated orders sharing one history (default: P)")
    p.set_defaults(func=cmd_study)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    from .selftest import PERTURBATIONS
    if getattr(args, "perturb", None) and args.perturb not in PERTURBATIONS:
        print("error: unknown perturbation %r (choose from %s)" % (args.perturb, ", ".join(PERTURBATIONS)),
              file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (Hn.ConfigError, geo.AmbiguousProjectionError, E2.UnsupportedConfigurationError,
            E2.UnsupportedOrderError, ValueError) as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except O.AccuracyError as exc:
        print("accuracy failure: %s" % exc, file=sys.stderr)
        return EXIT_FAIL
