"""Command-line front end.

Every subcommand prints one JSON report (sorted keys) on stdout.  Exit
codes: 0 pass, 2 criterion or convexity violated, 3 injectivity collision,
4 numerical failure or bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields

import numpy as np

from .config import RunConfig
from .errors import SchwarzliftError
from .harmonic import HarmonicMap
from .lift import SpaceMobius, lift_mesh, write_obj, write_ply
from .metric import (RadialMetric, lemma2_margin, normalizing_mobius, omega_profile,
                     radial_hessian_check, tau_slope_at_zero)
from .nehari import CATALOGUE, FLAGGED, lambda_limit, solve_extremal
from .parser import parse_expression
from .verify import (EXAMPLES_TABLE, check_criterion, make_example, polar_points,
                     thread_count, univalence_scan)

EXIT_PASS, EXIT_VIOLATION, EXIT_COLLISION, EXIT_FAILURE = 0, 2, 3, 4

_HELP = {
    "family": "map family: catenoid_exp, strip_catenoid, hille, or custom",
    "c": "family parameter c (dimensionless)",
    "t": "catenoid_exp dilation t (dimensionless)",
    "eps": "hille exponent epsilon (dimensionless)",
    "p_kind": "strip_catenoid weight: nehari2 or two_over",
    "h": "custom map: analytic h(z) as an expression",
    "g": "custom map: analytic g(z) as an expression",
    "q": "custom map: q(z) with g' = q^2 h'",
    "q_inv": "custom map: optional 1/q(z) for the g-chart",
    "p": "Nehari weight: catalogue key, t*key, or expression in x",
    "nr": "grid radial samples (count)",
    "ntheta": "grid angular samples (count)",
    "rmax": "grid outer radius (fraction of the unit disk)",
    "tol": "criterion pass tolerance (absolute, same units as 2p)",
    "scan_n": "injectivity scan sample count",
    "scan_rmax": "injectivity scan outer radius (fraction of the unit disk)",
    "sep": "minimum parameter separation of a collision (disk units)",
    "profile_rmax": "extremal profile radius (fraction of the unit disk)",
    "profile_n": "extremal profile grid nodes (count)",
    "angles": "convexity ray angles (radians, comma separated)",
    "convexity_n": "convexity samples per ray (count)",
    "convexity_rtop": "convexity ray end radius (fraction of the unit disk)",
    "json_out": "write the JSON report to this path",
    "csv_out": "write the CSV table to this path",
    "mesh_out": "mesh path; .obj or .ply",
    "seed": "seed for the construction audit samples",
    "threads": "worker cap (overrides SCHWARZLIFT_THREADS)",
}

_COMMAND_KEYS = {
    "check": ("nr", "ntheta", "rmax", "tol", "json_out", "csv_out"),
    "scan": ("scan_n", "scan_rmax", "sep", "json_out"),
    "mesh": ("nr", "ntheta", "rmax", "mesh_out", "json_out"),
    "convexity": ("profile_rmax", "profile_n", "angles", "convexity_n", "convexity_rtop",
                  "nr", "ntheta", "tol", "json_out"),
}
_MAP_KEYS = ("family", "c", "t", "eps", "p_kind", "h", "g", "q", "q_inv", "seed")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FAILURE, f"{self.prog}: error: {message}\n")


def _add_key(parser, key):
    default = getattr(RunConfig(), key)
    shown = ", ".join(f"{v:g}" for v in default) if isinstance(default, tuple) else default
    parser.add_argument(f"--{key.replace('_', '-')}", dest=key, default=argparse.SUPPRESS,
                        help=f"{_HELP[key]} (default: {shown!r})")


def build_parser():
    top = _Parser(prog="schwarzlift", description=__doc__.splitlines()[0],
                  formatter_class=argparse.RawDescriptionHelpFormatter)
    top.add_argument("--threads", type=int, default=None,
                     help="worker cap (default: SCHWARZLIFT_THREADS or 1)")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ext = sub.add_parser("extremal", help="solve the extremal profile of a Nehari weight")
    ext.add_argument("--p", default="pi2over4",
                     help="Nehari weight: catalogue key, t*key, or expression in x (default: 'pi2over4')")
    ext.add_argument("--rmax", type=float, default=0.9999,
                     help="profile radius (fraction of the unit disk, default: 0.9999)")
    ext.add_argument("--n", type=int, default=2001, help="grid nodes (count, default: 2001)")
    ext.add_argument("--out", default="", help="profile CSV path (default: none)")

    for name, text in (("check", "criterion margins on a polar grid"),
                       ("scan", "numerical injectivity scan of the lift"),
                       ("mesh", "export the lifted surface as OBJ or PLY"),
                       ("convexity", "metric convexity and tensor-margin audits")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", default=None, help="run configuration file ([run] section)")
        for key in _MAP_KEYS + ("p",) + _COMMAND_KEYS[name]:
            _add_key(sp, key)

    sub.add_parser("examples", help="list example families and Nehari weights")
    return top


def _config_from(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    changes = {}
    for f in fields(RunConfig):
        if f.name in vars(args) and f.name != "threads":
            raw = str(getattr(args, f.name))
            kind = type(f.default)
            if kind is tuple:
                changes[f.name] = tuple(float(v) for v in raw.split(",") if v.strip())
            elif kind in (int, float):
                changes[f.name] = kind(raw)
            else:
                changes[f.name] = raw
    return cfg.replace(**changes)


def build_map(cfg: RunConfig) -> HarmonicMap:
    if cfg.family == "custom":
        if not (cfg.h and cfg.g and cfg.q):
            raise SchwarzliftError("custom maps need h, g and q expressions")
        q_inv = parse_expression(cfg.q_inv) if cfg.q_inv else None
        return HarmonicMap(parse_expression(cfg.h), parse_expression(cfg.g),
                           parse_expression(cfg.q), q_inv=q_inv, seed=cfg.seed,
                           name=f"h={cfg.h}, g={cfg.g}, q={cfg.q}")
    params = {
        "catenoid_exp": {"c": cfg.c, "t": cfg.t},
        "strip_catenoid": {"p_kind": cfg.p_kind, "c": cfg.c},
        "hille": {"eps": cfg.eps, "c": cfg.c},
    }.get(cfg.family, {})
    return make_example(cfg.family, params).realized


def _emit(report, path=""):
    text = json.dumps(report, sort_keys=True, default=_jsonable)
    print(text)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"not serializable: {type(value)}")


def cmd_extremal(args):
    prof = solve_extremal(args.p, rmax=args.rmax, n=args.n)
    p = prof.p
    report = {"check": "extremal", "p": p.name, "rmax": args.rmax, "n": args.n,
              "phi_at_rmax": float(prof.phi[-1])}
    try:
        lim = lambda_limit(p)
        report.update(**{"lambda": lim.lam, "mu": lim.mu})
    except SchwarzliftError as exc:
        report.update(**{"lambda": None, "lambda_error": str(exc)})
    if p.phi_closed is not None:
        report["closed_form_error"] = float(np.max(np.abs(prof.phi - p.phi_closed(prof.grid))))
    a = prof.metric_coefficient(prof.grid)
    report["min_A_minus_p"] = float(np.min(a - p(prof.grid)))
    if args.out:
        prof.write_csv(args.out)
        report["csv"] = args.out
    _emit(report)
    return EXIT_PASS


def cmd_check(cfg):
    m = build_map(cfg)
    rep = check_criterion(m, cfg.p, (cfg.nr, cfg.ntheta, cfg.rmax), cfg.tol)
    if cfg.csv_out:
        rep.write_csv(cfg.csv_out)
    _emit(rep.record(), cfg.json_out)
    return EXIT_PASS if rep.passed else EXIT_VIOLATION


def cmd_scan(cfg):
    m = build_map(cfg)
    rep = univalence_scan(m, cfg.scan_n, cfg.scan_rmax, cfg.sep, threads=cfg.threads)
    _emit(rep.record(), cfg.json_out)
    return EXIT_PASS if rep.passed else EXIT_COLLISION


def cmd_mesh(cfg):
    m = build_map(cfg)
    path = cfg.mesh_out or "lift.obj"
    mesh = lift_mesh(m, cfg.nr, cfg.ntheta, cfg.rmax)
    if path.lower().endswith(".ply"):
        write_ply(mesh, path)
    elif path.lower().endswith(".obj"):
        write_obj(mesh, path)
    else:
        raise SchwarzliftError(f"mesh path must end in .obj or .ply: {path!r}")
    _emit({"check": "mesh", "path": path, "vertices": len(mesh.vertices),
           "faces": len(mesh.faces), "pass": True}, cfg.json_out)
    return EXIT_PASS


def cmd_convexity(cfg):
    m = build_map(cfg)
    metric = RadialMetric(solve_extremal(cfg.p, rmax=cfg.profile_rmax, n=cfg.profile_n))
    records = []
    ok = True
    for theta in cfg.angles:
        hess = radial_hessian_check(m, metric, theta, cfg.convexity_n, cfg.convexity_rtop)
        flat = omega_profile(m, SpaceMobius.identity(), metric, theta,
                             cfg.convexity_n, cfg.convexity_rtop)
        norm = normalizing_mobius(m, theta)
        bent = omega_profile(m, norm.transform, metric, theta, cfg.convexity_n, cfg.convexity_rtop)
        slope = tau_slope_at_zero(m, norm.transform, theta)
        bent_rec = bent.report.record()
        bent_rec.update(check="omega_convexity_normalized", tau_slope=slope,
                        omega_slope=bent.slope_at_zero)
        records += [hess.record(), flat.report.record(), bent_rec]
        ok &= hess.passed and flat.report.passed and bent.report.passed
    _, _, z = polar_points(cfg.nr, cfg.ntheta, min(cfg.rmax, cfg.convexity_rtop))
    lem = lemma2_margin(m, metric, z)
    k = int(np.argmin(lem))
    lem_pass = bool(lem.ravel()[k] >= -cfg.tol)
    records.append({"check": "lemma2", "grid": {"nr": cfg.nr, "ntheta": cfg.ntheta},
                    "min_margin": float(lem.ravel()[k]), "argmin": complex(z.ravel()[k]),
                    "pass": lem_pass})
    ok &= lem_pass
    _emit({"check": "convexity", "reports": records, "pass": bool(ok)}, cfg.json_out)
    return EXIT_PASS if ok else EXIT_VIOLATION


def cmd_examples():
    fams = [{"family": f, "params": ps, "construction": con, "identity": ident}
            for f, ps, con, ident in EXAMPLES_TABLE]
    weights = [{"key": k, "p": w.expr, "lambda": w.lam, "note": w.note, "flagged": False}
               for k, w in CATALOGUE.items()]
    weights += [{"key": k, "p": w.expr, "lambda": w.lam, "note": w.note, "flagged": True}
                for k, w in FLAGGED.items()]
    _emit({"families": fams, "weights": weights})
    return EXIT_PASS


_COMMANDS = {"check": cmd_check, "scan": cmd_scan, "mesh": cmd_mesh, "convexity": cmd_convexity}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        os.environ["SCHWARZLIFT_THREADS"] = str(args.threads)
    try:
        if args.command == "extremal":
            return cmd_extremal(args)
        if args.command == "examples":
            return cmd_examples()
        cfg = _config_from(args)
        threads = args.threads if args.threads is not None else (
            int(os.environ["SCHWARZLIFT_THREADS"]) if "SCHWARZLIFT_THREADS" in os.environ
            else cfg.threads)
        cfg = cfg.replace(threads=thread_count(threads))
        return _COMMANDS[args.command](cfg)
    except (SchwarzliftError, ValueError, OSError) as exc:
        print(f"schwarzlift: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
