"""Acceptance criteria 1-11, each printing one PASS/FAIL line."""

import dataclasses
import math
import time

import numpy as np
import pytest

from conftest import central_diff, rel_err
from focifit import bench
from focifit.baseline import fit_algebraic
from focifit.fitters import (
    compute_Pa,
    estimate_sigma_by_escape,
    estimate_sigma_from_fit,
    fit_axial_guided,
    fit_penalized,
    fit_raw,
    fit_spheroid_weighted,
    fit_weighted,
    initialize,
)
from focifit.geometry import CanonicalEllipse, CanonicalSpheroid, PointDiagnostics
from focifit.metrics import axis_direction_error, error_rate
from focifit.objectives import (
    WeightSet,
    eval_geometric,
    eval_penalized,
    eval_weighted,
    split_params,
)
from focifit.synthdata import GeneratorSpec, generate_ellipse_points, generate_spheroid_points, rotation_axis

TRUTH = CanonicalEllipse((0.0, 0.0), 5.0, 3.0, 0.0)


def data(s2, seed, shape=TRUTH, n=50):
    return generate_ellipse_points(GeneratorSpec(shape, n, s2, seed))[0]


def test_c1_gradients(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    rng = np.random.default_rng(2024)
    for dim in (2, 3):
        for kind in ("geometric", "penalized", "weighted"):
            for _ in range(100):
                pts = rng.normal(size=(30, dim)) * 3
                c1, c2 = rng.normal(size=(2, dim))
                a = float(np.linalg.norm(c1 - c2) / 2 + rng.uniform(0.5, 4))
                x = np.concatenate([c1, c2, [a]])
                if kind == "geometric":
                    f = lambda p: eval_geometric(pts, *split_params(p))
                elif kind == "penalized":
                    lam, amax, sig = rng.uniform(0.01, 1), rng.uniform(2, 8), rng.uniform(0.1, 1)
                    f = lambda p, lam=lam, amax=amax, sig=sig: eval_penalized(pts, *split_params(p), lam, amax, sig)
                else:
                    w = WeightSet(rng.uniform(0.5, 2, 30), 0.5)
                    f = lambda p, w=w: eval_weighted(pts, *split_params(p), w)
                fd = central_diff(lambda p: f(p).value, x, h=1e-6)
                worst = max(worst, rel_err(f(x).gradient, fd))
    dt = time.perf_counter() - t0
    ok = criterion("1", worst < 1e-6 and dt < 10, f"max rel err {worst:.2e}, {dt:.1f}s")
    assert ok


def test_c2_zero_noise_recovery(criterion):
    t0 = time.perf_counter()
    pts = data(0.0, 0)
    errs = {
        "raw": error_rate(TRUTH, fit_raw(pts).canonical),
        "axial_guided": error_rate(TRUTH, fit_axial_guided(pts).canonical),
        "weighted": error_rate(TRUTH, fit_weighted(pts).canonical),
        "penalized": error_rate(TRUTH, fit_penalized(pts).canonical),
        "algebraic": error_rate(TRUTH, fit_algebraic(pts).canonical),
    }
    dt = time.perf_counter() - t0
    ok = (
        max(errs["raw"], errs["axial_guided"], errs["weighted"]) < 1e-3
        and errs["penalized"] < 5e-3
        and errs["algebraic"] < 1e-6
        and dt < 30
    )
    detail = ", ".join(f"{k} {v:.2e}" for k, v in errs.items()) + f", {dt:.1f}s"
    assert criterion("2", ok, detail)


@pytest.fixture(scope="module")
def fig2_sweep():
    t0 = time.perf_counter()
    cfg = dataclasses.replace(bench.default_config("compare_proposed"), noise_grid=[0.1, 0.3, 0.5], trials=50)
    res = bench.run_compare_proposed(cfg)
    means = {(a["fitter"], a["sigma2"]): a["mean"] for a in res.aggregates}
    return means, time.perf_counter() - t0


def _fmt(means, s2):
    return " ".join(f"{f}={means[(f, s2)]:.3f}" for f in ("raw", "penalized", "weighted", "axial_guided"))


def test_c3a_penalized_weighted_beat_raw(fig2_sweep, criterion):
    means, dt = fig2_sweep
    ok = all(
        means[(f, s2)] < means[("raw", s2)] for f in ("penalized", "weighted") for s2 in (0.3, 0.5)
    ) and dt < 600
    assert criterion("3a", ok, f"s2=0.3: {_fmt(means, 0.3)}; s2=0.5: {_fmt(means, 0.5)}; {dt:.0f}s")


def test_c3b_penalized_weighted_comparable(fig2_sweep, criterion):
    means, _ = fig2_sweep
    ratios = {}
    for s2 in (0.1, 0.3, 0.5):
        p, w = means[("penalized", s2)], means[("weighted", s2)]
        ratios[s2] = abs(p - w) / max(p, w)
    ok = all(r <= 0.3 for r in ratios.values())
    detail = ", ".join(f"s2={s2}: rel diff {r:.2f}" for s2, r in ratios.items())
    assert criterion("3b", ok, detail)


def test_c3c_axial_guided_position(fig2_sweep, criterion):
    means, _ = fig2_sweep
    raw, ax = means[("raw", 0.5)], means[("axial_guided", 0.5)]
    better = min(means[("penalized", 0.5)], means[("weighted", 0.5)])
    between = better <= ax <= raw
    assert criterion("3c", ax < raw, f"raw {raw:.3f}, axial {ax:.3f}, best {better:.3f}, between={between}")


def test_c4_fig4_ordinal(criterion):
    t0 = time.perf_counter()
    cfg = dataclasses.replace(bench.default_config("compare_baseline"), noise_grid=[0.05, 0.8], trials=50)
    res = bench.run_compare_baseline(cfg)
    med = {(a["fitter"], a["sigma2"]): a["median"] for a in res.aggregates}
    dt = time.perf_counter() - t0
    ok = med[("penalized", 0.8)] < med[("algebraic", 0.8)] and dt < 600
    detail = (
        f"s2=0.8 penalized {med[('penalized', 0.8)]:.3f} vs algebraic {med[('algebraic', 0.8)]:.3f}; "
        f"s2=0.05 penalized {med[('penalized', 0.05)]:.4f} vs algebraic {med[('algebraic', 0.05)]:.4f}; {dt:.0f}s"
    )
    assert criterion("4", ok, detail)


def test_c5_monotone_convergence(criterion):
    t0 = time.perf_counter()
    traces = []
    for s2 in (0.0, 0.2, 0.5):
        pts = data(s2, 11)
        traces.append(fit_raw(pts).trace)
        traces.append(fit_penalized(pts).trace)
        traces.append(fit_axial_guided(pts).trace)
        traces.extend(fit_weighted(pts).stages)
    monotone = all(t.is_monotone() for t in traces)
    v = fit_raw(data(0.0, 0)).trace.values
    drop = v[0] / max(v[min(50, len(v) - 1)], 1e-300)
    dt = time.perf_counter() - t0
    ok = monotone and drop >= 1e3 and dt < 10
    assert criterion("5", ok, f"{len(traces)} traces monotone={monotone}, 50-iteration drop x{drop:.3g}, {dt:.1f}s")


def test_c6_metric_oracles(criterion):
    t0 = time.perf_counter()
    e = CanonicalEllipse((0, 0), 5, 3, 0.3)
    r_same = error_rate(e, e)
    r_disj = error_rate(CanonicalEllipse((0, 0), 5, 3, 0), CanonicalEllipse((20, 0), 5, 3, 0))
    r_circ = error_rate(CanonicalEllipse((0, 0), 1, 1, 0), CanonicalEllipse((0, 0), math.sqrt(2), math.sqrt(2), 0))
    dt = time.perf_counter() - t0
    ok = abs(r_same) < 1e-3 and abs(r_disj - 1) < 1e-3 and abs(r_circ - 0.5) < 1e-3 and dt < 5
    assert criterion("6", ok, f"{r_same:.6f} / {r_disj:.6f} / {r_circ:.6f}, {dt:.2f}s")


def test_c7a_quadrature_zero(criterion):
    assert criterion("7a", compute_Pa(0.0) == 0.0, f"P_a(0) = {float(compute_Pa(0.0))!r}")


def test_c7b_quadrature_limit(criterion):
    v = compute_Pa(1e4)
    assert criterion("7b", abs(v - 0.5) <= 1e-3, f"P_a(1e4) = {v:.6f}, |P_a - 0.5| = {abs(v - 0.5):.2e}")


def test_c7c_quadrature_monotone(criterion):
    t0 = time.perf_counter()
    vals = [compute_Pa(g) for g in (0.5, 1, 2, 4, 8)]
    ok = all(x < y for x, y in zip(vals, vals[1:])) and time.perf_counter() - t0 < 1
    assert criterion("7c", ok, " < ".join(f"{v:.4f}" for v in vals))


def test_c8_noise_estimator(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    cz = rng.uniform(-0.95, 1.0, 50)
    diags = [PointDiagnostics(0.0, 2 * 0.3**2 * (1 + c), c) for c in cz]
    ident = abs(estimate_sigma_from_fit(diags) - 0.3)
    hits = 0
    for seed in range(100):
        pts = data(0.2, 5000 + seed)
        rep = fit_penalized(pts)
        ev = eval_geometric(pts, *split_params(rep.trace.params))
        hits += abs(estimate_sigma_from_fit(ev.diagnostics) ** 2 - 0.2) <= 0.5 * 0.2
    dt = time.perf_counter() - t0
    ok = ident <= 1e-12 and hits >= 80 and dt < 120
    assert criterion("8", ok, f"identity err {ident:.1e}; {hits}/100 within 50%; {dt:.1f}s")


def test_c9_spheroid_recovery(criterion):
    t0 = time.perf_counter()
    shape = CanonicalSpheroid((0, 0, 0), 5.0, 1.0, rotation_axis(30, 20))
    pts, _ = generate_spheroid_points(GeneratorSpec(shape, 50, 0.0, 0))
    rep = fit_spheroid_weighted(pts)
    ax0 = axis_direction_error(shape.axis, rep.canonical.axis)
    arel = abs(rep.canonical.a / 5.0 - 1)
    errs = []
    for seed in range(20):
        p, _ = generate_spheroid_points(GeneratorSpec(shape, 50, 0.2, 9000 + seed))
        errs.append(axis_direction_error(shape.axis, fit_spheroid_weighted(p).canonical.axis))
    med = float(np.median(errs))
    dt = time.perf_counter() - t0
    ok = ax0 < 1.0 and arel < 0.01 and med < 5.0 and dt < 300
    assert criterion("9", ok, f"zero-noise axis {ax0:.3f} deg, a rel err {arel:.4f}; s2=0.2 median axis {med:.2f} deg; {dt:.1f}s")


def test_c10_determinism(tmp_path, criterion):
    same = True
    configs = [
        dataclasses.replace(bench.default_config("compare_proposed"), trials=2, noise_grid=[0.0, 0.3]),
        dataclasses.replace(bench.default_config("compare_baseline"), trials=2, noise_grid=[0.05, 0.8]),
        dataclasses.replace(bench.default_config("spheroid_demo"), trials=2),
    ]
    for cfg in configs:
        outs = []
        for run in ("a", "b"):
            if cfg.experiment == "spheroid_demo":
                res = bench.run_spheroid_demo(cfg, dump_dir=tmp_path / run)
            else:
                res = bench.RUNNERS[cfg.experiment](cfg)
            paths = res.write(tmp_path / run)
            outs.append([open(p, "rb").read() for p in paths.values()])
        same &= outs[0] == outs[1]
        dumps = sorted((tmp_path / "a").glob("spheroid_*.csv"))
        same &= all(d.read_bytes() == (tmp_path / "b" / d.name).read_bytes() for d in dumps)
    assert criterion("10", same, "CSV, JSON and point dumps byte-identical across reruns")


def test_c11_minimum_at_infinity(criterion):
    pts = data(0.5, 1234)
    v_true = eval_geometric(pts, (-4.0, 0.0), (4.0, 0.0), 5.0).value
    mean = pts.mean(axis=0)
    direction = np.linalg.svd(pts - mean, full_matrices=False)[2][0]
    c1, c2 = mean - 1e4 * direction, mean + 1e4 * direction
    sums = np.linalg.norm(pts - c1, axis=1) + np.linalg.norm(pts - c2, axis=1)
    v_far = eval_geometric(pts, c1, c2, sums.mean() / 2).value
    assert criterion("11", v_far < v_true, f"far {v_far:.3e} < true {v_true:.4f}")
