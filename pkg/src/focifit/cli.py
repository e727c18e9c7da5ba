"""Command-line entry point: ``focifit <subcommand> [options]``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .fitters import (
    fit_axial_guided,
    fit_penalized,
    fit_raw,
    fit_spheroid_penalized,
    fit_spheroid_raw,
    fit_spheroid_weighted,
    fit_weighted,
)
from .baseline import fit_algebraic
from .synthdata import read_points_csv

SUBCOMMANDS = {
    "compare-proposed": "compare_proposed",
    "compare-baseline": "compare_baseline",
    "spheroid-demo": "spheroid_demo",
}
FIT_METHODS = ("raw", "penalized", "axial_guided", "weighted", "algebraic")


def _noise_grid(text: str):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad noise grid {text!r}") from exc
    return values


def _common(p: argparse.ArgumentParser, sweep: bool) -> None:
    p.add_argument("--config", type=Path, help="JSON file mirroring ExperimentConfig")
    p.add_argument("--lambda", dest="lam", type=float, help="penalty weight")
    p.add_argument("--beta-steps", type=int, help="number of annealing stages")
    p.add_argument("--pa-interpretation", choices=["as-printed", "complement"])
    if sweep:
        p.add_argument("--seed", type=int, help="seed base")
        p.add_argument("--trials", type=int, help="trials per noise level")
        p.add_argument("--noise-grid", type=_noise_grid, help="comma-separated variances")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--spheroid-axes", choices=["semi", "full"])
        p.add_argument("--workers", type=int, help="parallel worker processes")
        p.add_argument("--timing", action="store_true",
                       help="record wall_ms (makes output non-reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="focifit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        _common(sub.add_parser(name, help=f"run the {name} sweep"), sweep=True)
    fit = sub.add_parser("fit", help="fit a single CSV dataset (header x,y or x,y,z)")
    fit.add_argument("csv", type=Path)
    fit.add_argument("--method", choices=FIT_METHODS, default="penalized")
    _common(fit, sweep=False)
    return parser


def config_from_args(args) -> bench.ExperimentConfig:
    experiment = SUBCOMMANDS[args.command]
    if args.config is not None:
        cfg = bench.load_config(args.config, experiment)
        cfg = dataclasses.replace(cfg, experiment=experiment)
    else:
        cfg = bench.default_config(experiment)
    overrides = {
        "seed_base": args.seed, "trials": args.trials, "noise_grid": args.noise_grid,
        "out": None if args.out is None else str(args.out), "lam": args.lam,
        "beta_steps": args.beta_steps, "pa_interpretation": args.pa_interpretation,
        "spheroid_axes": args.spheroid_axes, "workers": args.workers,
    }
    changes = {k: v for k, v in overrides.items() if v is not None}
    if args.timing:
        changes["record_timing"] = True
    return dataclasses.replace(cfg, **changes).validate()


def _shape_dict(shape) -> dict:
    d = {"center": np.asarray(shape.center).tolist(), "a": shape.a, "b": shape.b}
    if hasattr(shape, "phi"):
        d["phi"] = shape.phi
    d["axis"] = np.asarray(shape.axis).tolist()
    return d


def run_fit(args) -> dict:
    pts = read_points_csv(args.csv)
    lam = 0.1 if args.lam is None else args.lam
    steps = 50 if args.beta_steps is None else args.beta_steps
    dim = pts.shape[1]
    if dim == 3:
        fitters = {"raw": fit_spheroid_raw,
                   "penalized": lambda p: fit_spheroid_penalized(p, lam),
                   "weighted": lambda p: fit_spheroid_weighted(p, steps)}
        if args.method not in fitters:
            raise bench.ConfigError(f"method {args.method!r} is 2-D only")
    else:
        fitters = {"raw": fit_raw,
                   "penalized": lambda p: fit_penalized(p, lam),
                   "axial_guided": lambda p: fit_axial_guided(
                       p, pa_interpretation=args.pa_interpretation or "complement"),
                   "weighted": lambda p: fit_weighted(p, steps),
                   "algebraic": fit_algebraic}
    report = fitters[args.method](pts)
    foci = report.foci_form
    return {
        "method": report.method,
        "n_points": int(pts.shape[0]),
        "canonical": _shape_dict(report.canonical),
        "foci": {"c1": np.asarray(foci.c1).tolist(), "c2": np.asarray(foci.c2).tolist(),
                 "a": foci.a},
        "sigma_hat": report.sigma_hat,
        "iterations": report.iterations,
        "converged": report.converged,
    }


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            print(json.dumps(run_fit(args), indent=2))
            return 0
        cfg = config_from_args(args)
        out = Path(cfg.out)
        if cfg.experiment == "spheroid_demo":
            result = bench.run_spheroid_demo(cfg, dump_dir=out)
        else:
            result = bench.RUNNERS[cfg.experiment](cfg)
        paths = result.write(out)
    except (bench.ConfigError, ValueError, OSError) as exc:
        print(f"focifit: error: {exc}", file=sys.stderr)
        return 2
    n_failed = sum(r["failed"] for r in result.rows)
    print(f"{len(result.rows)} rows ({n_failed} failed) -> {paths['trials']}, {paths['summary']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
