"""Benchmark sweeps over noise levels and trials, with CSV/JSON output.

Three canned experiments are provided:

``compare_proposed``
    5x3 ellipse; raw, penalized, axial-guided and weighted fitters.
``compare_baseline``
    8x2 ellipse; penalized fitter against the algebraic baseline.
``spheroid_demo``
    rotated prolate spheroid fitted by the weighted spheroid fitter, with
    point dumps for external plotting.

Every fitter in a trial sees the same dataset. Trial ``t`` at noise level
index ``k`` uses seed ``seed_base + 1000 * k + t``.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .baseline import fit_algebraic
from .fitters import (
    fit_axial_guided,
    fit_penalized,
    fit_raw,
    fit_spheroid_penalized,
    fit_spheroid_weighted,
    fit_weighted,
)
from .geometry import CanonicalEllipse, CanonicalSpheroid
from .metrics import ErrorRateConfig, axis_direction_error, error_rate, quantile_summary
from .synthdata import (
    GeneratorSpec,
    generate_ellipse_points,
    generate_spheroid_points,
    points_to_csv,
    rotation_axis,
)

EXPERIMENTS = ("compare_proposed", "compare_baseline", "spheroid_demo", "custom")
ELLIPSE_FITTERS = ("raw", "penalized", "axial_guided", "weighted", "algebraic")
SPHEROID_FITTERS = ("spheroid_weighted", "spheroid_penalized")
CSV_COLUMNS = (
    "experiment", "fitter", "sigma2", "trial", "seed", "error_rate",
    "axis_error_deg", "iterations", "wall_ms", "converged", "failed",
)

# settings that do not influence results; left out of the summary echo
EXECUTION_ONLY = ("out", "workers")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "custom"
    a: float = 5.0
    b: float = 3.0
    phi: float = 0.0
    center: list = field(default_factory=lambda: [0.0, 0.0])
    n_points: int = 50
    noise_grid: list = field(default_factory=lambda: [0.1, 0.3, 0.5])
    trials: int = 50
    seed_base: int = 0
    fitters: list = field(default_factory=lambda: ["raw", "penalized"])
    lam: float = 0.1
    beta_steps: int = 50
    inner_iterations: int = 20
    pa_interpretation: str = "complement"
    # spheroid shape: axis lengths (major, minor) read as semi- or full axes
    spheroid_axes: str = "semi"
    spheroid_lengths: list = field(default_factory=lambda: [5.0, 1.0])
    rotation_deg: list = field(default_factory=lambda: [30.0, 20.0])
    grid_resolution: int = 2000
    workers: int = 1
    record_timing: bool = False
    out: str = "results"

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.noise_grid:
            raise ConfigError("noise_grid must be non-empty")
        if any(not (s >= 0 and math.isfinite(s)) for s in self.noise_grid):
            raise ConfigError("noise variances must be finite and >= 0")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.n_points < 1:
            raise ConfigError("n_points must be >= 1")
        if not self.fitters:
            raise ConfigError("fitters must be non-empty")
        known = SPHEROID_FITTERS if self.is_spheroid else ELLIPSE_FITTERS
        for name in self.fitters:
            if name not in known:
                raise ConfigError(f"fitter {name!r} not available; choose from {known}")
        if self.pa_interpretation not in ("as-printed", "complement"):
            raise ConfigError("pa_interpretation must be 'as-printed' or 'complement'")
        if self.spheroid_axes not in ("semi", "full"):
            raise ConfigError("spheroid_axes must be 'semi' or 'full'")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    @property
    def is_spheroid(self) -> bool:
        return self.experiment == "spheroid_demo"

    def to_json_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_json_dict(cls, data: dict, base: Optional["ExperimentConfig"] = None):
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        start = dataclasses.asdict(base) if base is not None else {}
        start.update(data)
        return cls(**start)


def default_config(experiment: str) -> ExperimentConfig:
    if experiment == "compare_proposed":
        return ExperimentConfig(
            experiment=experiment, a=5.0, b=3.0,
            noise_grid=[round(0.05 * i, 10) for i in range(11)],
            fitters=["raw", "penalized", "axial_guided", "weighted"],
        )
    if experiment == "compare_baseline":
        return ExperimentConfig(
            experiment=experiment, a=8.0, b=2.0,
            noise_grid=[round(0.08 * i, 10) for i in range(11)],
            fitters=["penalized", "algebraic"],
        )
    if experiment == "spheroid_demo":
        return ExperimentConfig(
            experiment=experiment, noise_grid=[0.2], trials=1,
            fitters=["spheroid_weighted"], spheroid_axes="full",
            spheroid_lengths=[10.0, 2.0],
        )
    if experiment == "custom":
        return ExperimentConfig()
    raise ConfigError(f"unknown experiment {experiment!r}")


def load_config(path, experiment: Optional[str] = None) -> ExperimentConfig:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    name = data.get("experiment", experiment or "custom")
    return ExperimentConfig.from_json_dict(data, default_config(name)).validate()


def true_shape(cfg: ExperimentConfig):
    if cfg.is_spheroid:
        major, minor = cfg.spheroid_lengths
        if cfg.spheroid_axes == "full":
            major, minor = major / 2.0, minor / 2.0
        return CanonicalSpheroid((0.0, 0.0, 0.0), major, minor, rotation_axis(*cfg.rotation_deg))
    return CanonicalEllipse.normalized(cfg.center, cfg.a, cfg.b, cfg.phi)


def trial_seed(cfg: ExperimentConfig, level_index: int, trial_index: int) -> int:
    return cfg.seed_base + 1000 * level_index + trial_index


def make_dataset(cfg: ExperimentConfig, sigma2: float, seed: int):
    spec = GeneratorSpec(true_shape(cfg), cfg.n_points, sigma2, seed)
    if cfg.is_spheroid:
        return generate_spheroid_points(spec)
    return generate_ellipse_points(spec)


def dataset_hash(points) -> str:
    return hashlib.sha256(np.ascontiguousarray(points, dtype="<f8").tobytes()).hexdigest()


def _run_fitter(name: str, points, cfg: ExperimentConfig):
    if name == "raw":
        return fit_raw(points)
    if name == "penalized":
        return fit_penalized(points, cfg.lam)
    if name == "axial_guided":
        return fit_axial_guided(points, pa_interpretation=cfg.pa_interpretation)
    if name == "weighted":
        return fit_weighted(points, cfg.beta_steps, cfg.inner_iterations)
    if name == "algebraic":
        return fit_algebraic(points)
    if name == "spheroid_weighted":
        return fit_spheroid_weighted(points, cfg.beta_steps, cfg.inner_iterations)
    if name == "spheroid_penalized":
        return fit_spheroid_penalized(points, cfg.lam)
    raise ConfigError(f"unknown fitter {name!r}")


def run_trial(cfg: ExperimentConfig, level_index: int, trial_index: int):
    """Fit one dataset with every configured fitter.

    Returns ``(rows, digest, fitted)`` where ``fitted`` maps fitter name to
    its fitted shape (``None`` on failure).
    """
    sigma2 = float(cfg.noise_grid[level_index])
    seed = trial_seed(cfg, level_index, trial_index)
    points, _ = make_dataset(cfg, sigma2, seed)
    digest = dataset_hash(points)
    truth = true_shape(cfg)
    err_cfg = ErrorRateConfig(grid_resolution=cfg.grid_resolution)
    rows, fitted = [], {}
    for name in cfg.fitters:
        t0 = time.perf_counter()
        row = {
            "experiment": cfg.experiment, "fitter": name, "sigma2": sigma2,
            "trial": trial_index, "seed": seed,
        }
        try:
            report = _run_fitter(name, points, cfg)
            shape = report.canonical
            if cfg.is_spheroid:
                row["error_rate"] = None
                row["a_rel_error"] = shape.a / truth.a - 1.0
            else:
                row["error_rate"] = error_rate(truth, shape, err_cfg)
            row["axis_error_deg"] = axis_direction_error(truth.axis, shape.axis)
            row["iterations"] = report.iterations
            row["converged"] = bool(report.converged)
            row["failed"] = False
            fitted[name] = shape
        except Exception as exc:  # recorded per trial; the sweep continues
            row.update(error_rate=None, axis_error_deg=None, iterations=None,
                       converged=False, failed=True, error=f"{type(exc).__name__}: {exc}")
            fitted[name] = None
        wall = (time.perf_counter() - t0) * 1000.0
        row["wall_ms"] = wall if cfg.record_timing else None
        rows.append(row)
    return rows, digest, fitted


def _trial_task(args):
    cfg, level_index, trial_index = args
    rows, digest, _ = run_trial(cfg, level_index, trial_index)
    return level_index, trial_index, rows, digest


@dataclass
class SweepResult:
    config: ExperimentConfig
    rows: list
    aggregates: list
    dataset_hashes: dict
    extras: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "artifact_version": __version__,
            "config": {k: v for k, v in self.config.to_json_dict().items()
                       if k not in EXECUTION_ONLY},
            "aggregates": self.aggregates,
            "dataset_hashes": self.dataset_hashes,
            "failures": [
                {k: r[k] for k in ("fitter", "sigma2", "trial", "error")}
                for r in self.rows if r["failed"]
            ],
            **self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(_clean(self.summary()), indent=2, sort_keys=True) + "\n"

    def write(self, out_dir) -> dict:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = self.config.experiment
        csv_path = out / f"{stem}_trials.csv"
        json_path = out / f"{stem}_summary.json"
        csv_path.write_text(self.to_csv(), encoding="utf-8", newline="\n")
        json_path.write_text(self.to_json(), encoding="utf-8", newline="\n")
        return {"trials": str(csv_path), "summary": str(json_path)}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.floating):
        return _clean(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def aggregate(rows, metric: str = "error_rate") -> list:
    """Per (fitter, sigma2) means and nearest-rank 20/50/80% quantiles."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["fitter"], r["sigma2"]), []).append(r)
    out = []
    for (fitter, sigma2), grp in sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        vals = [r[metric] for r in grp if not r["failed"] and r[metric] is not None]
        axis = [r["axis_error_deg"] for r in grp if not r["failed"]]
        entry = {
            "fitter": fitter, "sigma2": sigma2, "metric": metric,
            "trials": len(grp), "failed": sum(r["failed"] for r in grp),
            "converged": sum(bool(r["converged"]) for r in grp),
        }
        if vals:
            q20, q50, q80 = quantile_summary(vals, [0.2, 0.5, 0.8])
            entry.update(mean=float(np.mean(vals)), q20=q20, median=q50, q80=q80)
        if axis:
            entry["mean_axis_error_deg"] = float(np.mean(axis))
        out.append(entry)
    return out


def win_fractions(rows) -> list:
    """Fraction of trials (per noise level) in which each fitter has the lowest error."""
    by_trial: dict = {}
    for r in rows:
        by_trial.setdefault((r["sigma2"], r["trial"]), []).append(r)
    counts: dict = {}
    for (sigma2, _), grp in sorted(by_trial.items()):
        scored = [(r["error_rate"], r["fitter"]) for r in grp if not r["failed"]]
        level = counts.setdefault(sigma2, {r["fitter"]: 0 for r in grp})
        level.setdefault("_trials", 0)
        level["_trials"] += 1
        if scored:
            level[min(scored)[1]] += 1
    out = []
    for sigma2, level in sorted(counts.items()):
        n = level.pop("_trials")
        for fitter in sorted(level):
            out.append({"sigma2": sigma2, "fitter": fitter, "win_fraction": level[fitter] / n})
    return out


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    cfg.validate()
    tasks = [(cfg, k, t) for k in range(len(cfg.noise_grid)) for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_trial_task, tasks, chunksize=4))
    else:
        results = [_trial_task(t) for t in tasks]
    results.sort(key=lambda r: (r[0], r[1]))
    order = {name: i for i, name in enumerate(cfg.fitters)}
    rows, hashes = [], {}
    for k, t, trial_rows, digest in results:
        rows.extend(sorted(trial_rows, key=lambda r: order[r["fitter"]]))
        hashes[f"{cfg.noise_grid[k]!r}/{t}"] = digest
    metric = "axis_error_deg" if cfg.is_spheroid else "error_rate"
    return SweepResult(cfg, rows, aggregate(rows, metric), hashes)


def _with_experiment(cfg: Optional[ExperimentConfig], name: str) -> ExperimentConfig:
    if cfg is None:
        return default_config(name)
    if cfg.experiment != name:
        cfg = dataclasses.replace(cfg, experiment=name)
    return cfg


def run_compare_proposed(cfg: Optional[ExperimentConfig] = None) -> SweepResult:
    return run_sweep(_with_experiment(cfg, "compare_proposed"))


def run_compare_baseline(cfg: Optional[ExperimentConfig] = None) -> SweepResult:
    result = run_sweep(_with_experiment(cfg, "compare_baseline"))
    result.extras["win_fractions"] = win_fractions(result.rows)
    return result


def _surface_samples(shape: CanonicalSpheroid, n_theta=24, n_psi=12) -> np.ndarray:
    theta, psi = np.meshgrid(
        np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False),
        np.linspace(0.0, math.pi, n_psi),
    )
    return shape.points(theta.ravel(), psi.ravel())


def run_spheroid_demo(cfg: Optional[ExperimentConfig] = None, dump_dir=None) -> SweepResult:
    """Spheroid sweep; trial 0 of every level is also dumped as CSV point sets."""
    cfg = _with_experiment(cfg, "spheroid_demo")
    result = run_sweep(cfg)
    rel = {}
    for r in result.rows:
        if not r["failed"]:
            rel.setdefault(f"{r['fitter']}/{r['sigma2']!r}", []).append(r["a_rel_error"])
    result.extras["median_a_rel_error"] = {
        k: quantile_summary(v, [0.5])[0] for k, v in sorted(rel.items())
    }
    if dump_dir is not None:
        result.extras["dumps"] = dump_spheroid_samples(cfg, dump_dir)
    return result


def dump_spheroid_samples(cfg: ExperimentConfig, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    truth = true_shape(cfg)
    written = []
    for k, sigma2 in enumerate(cfg.noise_grid):
        _, _, fitted = run_trial(cfg, k, 0)
        points, _ = make_dataset(cfg, float(sigma2), trial_seed(cfg, k, 0))
        sets = {"observed": points, "true_surface": _surface_samples(truth)}
        for name, shape in fitted.items():
            if shape is not None:
                sets[f"fitted_{name}"] = _surface_samples(shape)
        for label, pts in sets.items():
            path = out / f"spheroid_level{k}_{label}.csv"
            path.write_text(points_to_csv(pts), encoding="utf-8", newline="\n")
            written.append(path.name)
    return written


RUNNERS = {
    "compare_proposed": run_compare_proposed,
    "compare_baseline": run_compare_baseline,
}
