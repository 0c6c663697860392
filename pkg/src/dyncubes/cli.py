"""Command-line front end.

    dyncubes systems
    dyncubes saturation --config sat.ini --out results/ --threads 4
    dyncubes cube --emit-config > cube.ini

Every run writes ``<name>.json`` (resolved config, parameters, profiles,
verdict) and ``<name>_profiles.csv`` into ``--out``.  Apart from the
``timestamp`` field, reruns with the same config and seed are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import os
import sys as _sys
from typing import Optional, Sequence

import numpy as np

from . import saturation as sat
from .config import ConfigError, ExperimentConfig, default_config, emit_config, load_config, with_overrides
from .cubes import vertex_label
from .relations import RPQuery, rp_distance, rp_verdict
from .sampler import BudgetOverflow, sample_cube_set
from .systems import Kind, SymbolicPoint, SystemError_, SystemSpec

EXIT_CONFIG = 64
EXIT_BUDGET = 65

COMMANDS = {
    "cube": "CUBE_SAMPLE",
    "rp": "RP_ESTIMATE",
    "saturation": "SATURATION",
    "face-saturation": "FACE_SATURATION",
    "completion": "COMPLETION",
    "sturmian-cex": "STURMIAN_CEX",
}

SYSTEMS_TABLE = [
    ("ROTATION", "alpha", "x -> x + alpha on T^1", "IDENTITY"),
    ("AFFINE_SKEW", "alpha, dim",
     "(x_1, .., x_s) -> (x_1 + alpha, x_2 + x_1, .., x_s + x_(s-1)) on T^dim",
     "IDENTITY, SKEW_TRUNCATE(k) onto the first k coordinates"),
    ("STURMIAN", "alpha",
     "shift on codings of x + n*alpha by [0, 1-alpha); points on the orbit of 0 carry "
     "two codings, LEFT_CLOSED (L) and RIGHT_CLOSED (R)",
     "IDENTITY, STURMIAN_TO_ROTATION"),
]


def list_systems() -> str:
    head = ("kind", "parameters", "map", "factor maps")
    widths = [max(len(r[i]) for r in SYSTEMS_TABLE + [head]) for i in range(3)]
    lines = []
    for row in [head] + SYSTEMS_TABLE:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row[:3], widths)) + "  " + row[3])
    return "\n".join(lines)


# ---------------------------------------------------------------- output helpers

def _point_text(p) -> str:
    if isinstance(p, SymbolicPoint):
        return f"{p.convention.short}@{p.steps}" if p.base == 0.0 else f"{p.base!r}{p.convention.short}@{p.steps}"
    return " ".join(repr(float(v)) for v in np.atleast_1d(p))


def write_profiles_csv(path: str, labels: Sequence[str], profiles) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label", "step", "N", "grid", "orbit", "distance"])
        for i, (lab, prof) in enumerate(zip(labels, profiles)):
            for k, (b, dist) in enumerate(zip(prof.budgets, prof.distances)):
                w.writerow([i, lab, k, b.N, b.base_grid, b.base_orbit_len, repr(float(dist))])


def write_sample_csv(path: str, s) -> int:
    """One row per configuration: witness ``(x, n)`` then the entries in vertex order."""
    bidx, ns = s.witness_arrays()
    d = s.d
    verts = [vertex_label(e, d) for e in range(1 << d)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "x"] + [f"n{i + 1}" for i in range(d)] + [f"e{v}" for v in verts])
        if s.sys.is_torus:
            cfg = s.configs()
            for i in range(cfg.shape[0]):
                w.writerow([i, _point_text(s.base_point(int(bidx[i])))] + [int(v) for v in ns[i]]
                           + [_point_text(cfg[i, e]) for e in range(1 << d)])
        else:
            for i in range(bidx.size):
                c = s.config_at(i)
                w.writerow([i, _point_text(s.base_point(int(bidx[i])))] + [int(v) for v in ns[i]]
                           + [_point_text(p) for p in c.entries])
    return int(bidx.size)


def write_json(path: str, cfg: ExperimentConfig, body: dict) -> None:
    doc = {"config": cfg.to_dict(), "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(), **body}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------- experiments

def _rp_prediction(sys: SystemSpec, x, y, d: int) -> Optional[bool]:
    """Membership in ``RP^[d]`` for torus systems: agreement on the first ``min(d, dim)`` coordinates."""
    if sys.kind is Kind.STURMIAN:
        return None
    k = min(d, sys.dim)
    a = np.mod(np.asarray(x, float)[:k], 1.0)
    b = np.mod(np.asarray(y, float)[:k], 1.0)
    return bool(np.array_equal(a, b))


def run(cfg: ExperimentConfig, out_dir: str = ".", threads: int = 1) -> int:
    """Execute ``cfg`` and write its report files; returns the exit code."""
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.join(out_dir, cfg.name)
    sys = cfg.system()
    budgets = cfg.budgets()
    exp = cfg.experiment

    if exp == "CUBE_SAMPLE":
        s = sample_cube_set(sys, cfg.d, budgets[-1])
        rows = write_sample_csv(stem + "_sample.csv", s)
        write_profiles_csv(stem + "_profiles.csv", [], [])
        write_json(stem + ".json", cfg, {"experiment": exp, "params": {"system": sys.label(), "d": cfg.d,
                   "budget": list(budgets[-1].as_tuple())}, "rows": rows, "profiles": [], "verdict": None})
        print(f"{rows} configurations -> {stem}_sample.csv")
        return sat.EXIT_OK

    if exp == "RP_ESTIMATE":
        x, y = cfg.point("x"), cfg.point("y")
        prof = rp_distance(RPQuery(sys, x, y, cfg.d, budgets, cfg.window))
        out = rp_verdict(prof, cfg.tol)
        pred = _rp_prediction(sys, x, y, cfg.d)
        write_profiles_csv(stem + "_profiles.csv", ["rp"], [prof])
        write_json(stem + ".json", cfg, {"experiment": exp, "params": {"system": sys.label(), "d": cfg.d,
                   "tol": cfg.tol, "predicted": None if pred is None else ("in" if pred else "evidence-out")},
                   "profiles": [{"id": 0, "label": "rp", **prof.to_dict()}], "verdict": out["verdict"]})
        print(f"RP^[{cfg.d}] verdict: {out['verdict']} (final distance {prof.final:.6g})")
        if out["verdict"] == "inconclusive":
            return sat.EXIT_INCONCLUSIVE
        if pred is None or pred == (out["verdict"] == "in"):
            return sat.EXIT_OK
        return sat.EXIT_VIOLATION

    if exp in ("SATURATION", "FACE_SATURATION"):
        f = cfg.factor()
        if exp == "SATURATION":
            rep = sat.check_cube_saturation(sys, f, cfg.d, budgets, cfg.n_trials, cfg.tol, cfg.seed,
                                            cfg.window, cfg.down_budget(), threads)
        else:
            rep = sat.check_face_saturation(sys, f, cfg.d, cfg.point("x"), budgets, cfg.n_trials, cfg.tol,
                                            cfg.seed, cfg.window, cfg.down_budget(), threads)
        write_profiles_csv(stem + "_profiles.csv", rep.labels, rep.profiles)
        write_json(stem + ".json", cfg, rep.to_dict())
        print(f"{exp} verdict: {rep.verdict} (max final {rep.max_final:.6g}, "
              f"{rep.n_plateaued} plateaued of {len(rep.profiles)})")
        return sat.exit_code(rep.verdict, sat.predicts_saturation(f, cfg.d))

    if exp == "COMPLETION":
        s = sample_cube_set(sys, cfg.d, budgets[-1])
        rep = sat.unique_completion_check(s, cfg.delta_match, cfg.factor_c)
        write_profiles_csv(stem + "_profiles.csv", [], [])
        with open(stem + "_pairs.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["omitted", "i", "j", "shared_distance", "last_distance"])
            for p in rep.pairs:
                w.writerow([p["omitted"], p["i"], p["j"], repr(p["shared_distance"]), repr(p["last_distance"])])
        pred = sat.predicts_unique_completion(sys, cfg.d)
        write_json(stem + ".json", cfg, {"experiment": exp, "params": {"system": sys.label(), "d": cfg.d,
                   "budget": list(budgets[-1].as_tuple()),
                   "predicted": sat.CONSISTENT if pred else sat.VIOLATION},
                   "completion": rep.to_dict(), "profiles": [], "verdict": rep.verdict})
        print(f"completion verdict: {rep.verdict} ({rep.n_pairs} pairs, max last-entry gap {rep.max_last:.6g})")
        return sat.exit_code(rep.verdict, pred)

    if exp == "STURMIAN_CEX":
        if sys.kind is not Kind.STURMIAN:
            raise ConfigError("STURMIAN_CEX runs on the STURMIAN system")
        ranked = sat.sturmian_counterexample(cfg.d, budgets, cfg.window, sys.alpha, threads)
        rep = sat.cex_report(ranked, cfg.d, cfg.tol, cfg.window, sys.alpha)
        write_profiles_csv(stem + "_profiles.csv", rep.labels, rep.profiles)
        write_json(stem + ".json", cfg, rep.to_dict())
        bad = [lab for lab, p in zip(rep.labels, rep.profiles) if p.plateau and p.final >= cfg.tol]
        print(f"patterns plateaued above {cfg.tol}: {', '.join(bad) or 'none'}")
        return sat.exit_code(rep.verdict, False)

    raise ConfigError(f"unknown experiment {exp!r}")


# ---------------------------------------------------------------- argparse

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyncubes", description="Numerical experiments on dynamical cubes.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("systems", help="list built-in systems and factor maps")
    for name, exp in COMMANDS.items():
        sp = sub.add_parser(name, help=f"run a {exp} experiment")
        sp.add_argument("--config", metavar="PATH", help="experiment file (defaults to a small built-in run)")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.add_argument("--tol", type=float, help="override the configured tolerance")
        sp.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
        sp.add_argument("--emit-config", action="store_true", help="print the resolved config and exit")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "systems":
        print(list_systems())
        return 0
    exp = COMMANDS[args.command]
    try:
        cfg = load_config(args.config, exp) if args.config else default_config(exp)
        cfg = with_overrides(cfg, seed=args.seed, tol=args.tol)
        if args.emit_config:
            _sys.stdout.write(emit_config(cfg))
            return 0
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        return run(cfg, args.out, args.threads)
    except BudgetOverflow as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, SystemError_, OSError) as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    _sys.exit(main())
