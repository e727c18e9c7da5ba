"""End-to-end foci-based fitting pipelines for ellipses and spheroids.

Every pipeline starts from :func:`initialize` and runs :func:`descend` on one
of the focal-distance objectives:

* ``fit_raw``: the plain mean squared residual;
* ``fit_penalized``: plus an exponential penalty on ``a`` scaled by a noise
  estimate obtained from an "escape" run of the plain objective;
* ``fit_axial_guided``: orientation and center from the plain objective,
  then semi-axes from quantiles of the rotated data;
* ``fit_weighted``: per-point weights ``1/(1 + beta cos zeta)`` held fixed
  within each stage while ``beta`` ramps linearly from 0 to 1.

The spheroid variants reuse the same machinery with 3-D points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import erf

from .geometry import (
    CanonicalEllipse,
    CanonicalSpheroid,
    FociEllipse,
    FociSpheroid,
    GeometryError,
    canonical_to_foci,
    foci_to_canonical,
    normalize_axis,
    spheroid_to_canonical,
)
from .objectives import (
    COS_ZETA_FLOOR,
    compute_weights,
    eval_geometric,
    penalty,
    split_params,
    value_and_grad,
)
from .optimizer import DescentConfig, DescentTrace, descend

DEFAULT_LAMBDA = 0.1
DEFAULT_BETA_STEPS = 50
DEFAULT_INNER_ITERATIONS = 20
MIN_POINTS = {2: 6, 3: 9}
QUADRATURE_NODES = 1025
PA_INTERPRETATIONS = ("as-printed", "complement")
# relative noise estimate treated as exactly zero by the axial-guided sizing
SIGMA_ZERO_TOL = 1e-6


class DegenerateDataError(ValueError):
    """The point set cannot support a meaningful fit."""


@dataclass(frozen=True)
class InitEstimate:
    z_mean: np.ndarray
    a_init: float
    a_max_hat: float
    foci_init: tuple
    sigma_hat: Optional[float] = None

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.foci_init[0], self.foci_init[1], [self.a_init]])


@dataclass
class FitReport:
    method: str
    canonical: Union[CanonicalEllipse, CanonicalSpheroid]
    foci_form: Union[FociEllipse, FociSpheroid]
    trace: Optional[DescentTrace] = None
    sigma_hat: Optional[float] = None
    a_max_hat: Optional[float] = None
    stages: tuple = ()
    extras: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        if self.stages:
            return sum(s.iterations for s in self.stages)
        return self.trace.iterations if self.trace is not None else 0

    @property
    def converged(self) -> bool:
        return self.trace.converged if self.trace is not None else True


def _check_points(points, dim, min_points=None) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"expected an (n, {dim}) point array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    need = MIN_POINTS[dim] if min_points is None else min_points
    if pts.shape[0] < need:
        raise DegenerateDataError(f"need at least {need} points, got {pts.shape[0]}")
    sv = np.linalg.svd(pts - pts.mean(axis=0), compute_uv=False)
    if sv[0] == 0.0:
        raise DegenerateDataError("all points are identical")
    if sv[1] <= 1e-9 * sv[0]:
        raise DegenerateDataError("points are collinear")
    return pts


def initialize(points) -> InitEstimate:
    """Starting values from the point cloud's mean, spread and elongation.

    The foci start at ``z_mean +/- (a_init / 2) v`` where ``v`` is the first
    principal direction of the centered data.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise DegenerateDataError("need an (n, d) array with at least 2 points")
    z_mean = pts.mean(axis=0)
    centered = pts - z_mean
    dist = np.linalg.norm(centered, axis=1)
    a_max_hat = float(dist.max())
    if a_max_hat == 0.0:
        raise DegenerateDataError("all points are identical")
    a_init = float(dist.mean())
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    v = normalize_axis(vt[0])
    half = 0.5 * a_init * v
    return InitEstimate(z_mean, a_init, a_max_hat, (z_mean - half, z_mean + half))


def _helpers(scale: float, dim: int):
    floor = 1e-9 * scale
    pattern = np.concatenate(
        [np.linspace(1.0, 0.5, dim), -np.linspace(0.5, 1.0, dim), [0.0]]
    )

    def project(x):
        if x[-1] < floor:
            x = x.copy()
            x[-1] = floor
        return x

    def jitter(x):
        return x + floor * pattern

    return project, jitter


def _geometric_evaluator(points):
    return lambda x: value_and_grad(points, x)


def _penalized_evaluator(points, lam, a_max_hat, sigma_hat):
    def evaluate(x):
        value, grad = value_and_grad(points, x)
        p, dp = penalty(float(x[-1]), lam, a_max_hat, sigma_hat)
        grad[-1] += dp
        return value + p, grad

    return evaluate


def _weighted_evaluator(points, weights):
    return lambda x: value_and_grad(points, x, weights)


def _shape_from_vector(x, dim):
    if dim == 2:
        foci = FociEllipse.from_vector(x)
        return foci_to_canonical(foci), foci
    foci = FociSpheroid.from_vector(x)
    return spheroid_to_canonical(foci), foci


def _run(points, init, evaluate, config, early_stop=None):
    project, jitter = _helpers(init.a_max_hat, points.shape[1])
    return descend(
        evaluate, init.as_vector(), config, early_stop=early_stop,
        project=project, jitter=jitter,
    )


def estimate_sigma_by_escape(points, init: InitEstimate,
                             config: DescentConfig = DescentConfig()) -> float:
    """Noise level from a plain-objective run stopped once ``a`` passes ``a_max_hat``.

    Returns the square root of the objective where the run ended; a run that
    converges before escaping yields the converged value.
    """
    pts = np.asarray(points, dtype=float)
    trace = _run(
        pts, init, _geometric_evaluator(pts), config,
        early_stop=lambda x: x[-1] > init.a_max_hat,
    )
    return math.sqrt(max(trace.final_value, 0.0))


def _raw(points, dim, config, method="raw"):
    pts = _check_points(points, dim)
    init = initialize(pts)
    trace = _run(pts, init, _geometric_evaluator(pts), config)
    canonical, foci = _shape_from_vector(trace.params, dim)
    return FitReport(method, canonical, foci, trace, a_max_hat=init.a_max_hat)


def fit_raw(points, config: DescentConfig = DescentConfig()) -> FitReport:
    """Minimize the plain focal-distance objective from the default start."""
    return _raw(points, 2, config)


def fit_spheroid_raw(points3, config: DescentConfig = DescentConfig()) -> FitReport:
    return _raw(points3, 3, config)


def _penalized(points, dim, lam, config):
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    pts = _check_points(points, dim)
    init = initialize(pts)
    sigma_hat = estimate_sigma_by_escape(pts, init, config)
    evaluate = _penalized_evaluator(pts, lam, init.a_max_hat, sigma_hat)
    trace = _run(pts, init, evaluate, config)
    canonical, foci = _shape_from_vector(trace.params, dim)
    return FitReport(
        "penalized", canonical, foci, trace,
        sigma_hat=sigma_hat, a_max_hat=init.a_max_hat, extras={"lambda": lam},
    )


def fit_penalized(points, lam: float = DEFAULT_LAMBDA,
                  config: DescentConfig = DescentConfig()) -> FitReport:
    """Penalized focal-distance fit.

    The objective is the plain mean squared residual plus
    ``lam * a_max_hat * sigma_hat * exp((a / a_max_hat)**4)``, where
    ``a_max_hat`` is the largest distance of a point from the data mean and
    ``sigma_hat`` comes from :func:`estimate_sigma_by_escape`.
    """
    return _penalized(points, 2, lam, config)


def fit_spheroid_penalized(points3, lam: float = DEFAULT_LAMBDA,
                           config: DescentConfig = DescentConfig()) -> FitReport:
    return _penalized(points3, 3, lam, config)


def _simpson(values: np.ndarray, h: float) -> float:
    return h / 3.0 * float(
        values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-1:2].sum()
    )


def _erf_quadrature(gamma: float, shape_fn) -> float:
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    theta = np.linspace(0.0, 0.5 * math.pi, QUADRATURE_NODES)
    integrand = erf(gamma * shape_fn(theta) / math.sqrt(2.0))
    return _simpson(integrand, theta[1] - theta[0]) / math.pi


def compute_Pa(gamma: float) -> float:
    """``(1/pi) * int_0^{pi/2} erf(gamma (1 - cos t) / sqrt 2) dt`` by Simpson's rule.

    Tends to 1/2 as ``gamma`` grows. It is the fraction of points, beyond
    one half, expected to fall inside ``|x'| <= a`` when ``gamma = a / sigma``.
    """
    return _erf_quadrature(gamma, lambda t: 1.0 - np.cos(t))


def compute_Pb(gamma_prime: float) -> float:
    """Minor-axis counterpart of :func:`compute_Pa` (``sin`` in place of ``cos``)."""
    return _erf_quadrature(gamma_prime, lambda t: 1.0 - np.sin(t))


def estimate_sigma_from_fit(diagnostics) -> float:
    """Noise level implied by per-point contributions ``f_i ~ 2 sigma^2 (1 + cos zeta_i)``.

    Accepts a list of :class:`~focifit.geometry.PointDiagnostics` or an
    :class:`~focifit.objectives.ObjectiveEval`.
    """
    if hasattr(diagnostics, "contributions"):
        f = np.asarray(diagnostics.contributions, dtype=float)
        cz = np.asarray(diagnostics.cos_zeta, dtype=float)
    else:
        if len(diagnostics) == 0:
            raise ValueError("need at least one point diagnostic")
        f = np.array([d.contribution for d in diagnostics], dtype=float)
        cz = np.array([d.cos_zeta for d in diagnostics], dtype=float)
    cz = np.maximum(cz, COS_ZETA_FLOOR)
    return math.sqrt(float(np.mean(f / (2.0 * (1.0 + cz)))))


def quantile_size(abs_coords, fraction: float) -> float:
    """Smallest order statistic covering ``fraction`` of the points."""
    vals = np.sort(np.asarray(abs_coords, dtype=float))
    k = min(max(math.ceil(fraction * vals.size), 1), vals.size)
    return float(vals[k - 1])


def fit_axial_guided(points, config: DescentConfig = DescentConfig(),
                     pa_interpretation: str = "complement") -> FitReport:
    """Two-stage fit: orientation/center from the plain objective, sizes from quantiles.

    ``pa_interpretation`` selects how the erf integrals map to coverage:
    ``"as-printed"`` uses ``P_a`` itself as the covered fraction, while
    ``"complement"`` uses ``1/2 + P_a``, which is the fraction of points with
    ``|x'| <= a`` under Gaussian noise and uniform angles.
    """
    if pa_interpretation not in PA_INTERPRETATIONS:
        raise ValueError(f"pa_interpretation must be one of {PA_INTERPRETATIONS}")
    pts = _check_points(points, 2)
    init = initialize(pts)
    trace = _run(pts, init, _geometric_evaluator(pts), config)
    step1, _ = _shape_from_vector(trace.params, 2)
    local = step1.to_local(pts)
    c1, c2, a = split_params(trace.params)
    sigma_hat = estimate_sigma_from_fit(eval_geometric(pts, c1, c2, a))
    extras = {"pa_interpretation": pa_interpretation, "step1": step1}
    if sigma_hat <= SIGMA_ZERO_TOL * step1.a:
        canonical = step1
    else:
        p_a = compute_Pa(step1.a / sigma_hat)
        p_b = compute_Pb(step1.b / sigma_hat)
        extras.update(P_a=p_a, P_b=p_b)
        if pa_interpretation == "complement":
            p_a, p_b = 0.5 + p_a, 0.5 + p_b
        size_a = quantile_size(np.abs(local[:, 0]), p_a)
        size_b = quantile_size(np.abs(local[:, 1]), p_b)
        if size_b <= 0 or size_a <= 0:
            raise DegenerateDataError("quantile sizing produced a zero semi-axis")
        canonical = CanonicalEllipse.normalized(step1.center, size_a, size_b, step1.phi)
    return FitReport(
        "axial_guided", canonical, canonical_to_foci(canonical), trace,
        sigma_hat=sigma_hat, a_max_hat=init.a_max_hat, extras=extras,
    )


def _weighted(points, dim, beta_steps, inner_iterations, config, betas=None):
    if beta_steps < 2:
        raise ValueError("beta_steps must be at least 2")
    if inner_iterations < 1:
        raise ValueError("inner_iterations must be at least 1")
    pts = _check_points(points, dim)
    init = initialize(pts)
    project, jitter = _helpers(init.a_max_hat, dim)
    inner = config.with_(max_iterations=inner_iterations)
    if betas is None:
        betas = np.linspace(0.0, 1.0, beta_steps)
    x = init.as_vector()
    stages = []
    for beta in betas:
        c1, c2, a = split_params(x)
        weights = compute_weights(pts, c1, c2, a, float(beta)).weights
        trace = descend(
            _weighted_evaluator(pts, weights), x, inner, project=project, jitter=jitter
        )
        stages.append(trace)
        x = trace.params
    canonical, foci = _shape_from_vector(x, dim)
    return FitReport(
        "weighted", canonical, foci, stages[-1], a_max_hat=init.a_max_hat,
        stages=tuple(stages),
        extras={"beta_steps": beta_steps, "inner_iterations": inner_iterations},
    )


def fit_weighted(points, beta_steps: int = DEFAULT_BETA_STEPS,
                 inner_iterations: int = DEFAULT_INNER_ITERATIONS,
                 config: DescentConfig = DescentConfig()) -> FitReport:
    """Annealed weighted fit with ``beta`` ramped linearly from 0 to 1.

    At each of the ``beta_steps`` stages the weights are recomputed from the
    current foci and then held fixed for up to ``inner_iterations`` descent
    steps.
    """
    return _weighted(points, 2, beta_steps, inner_iterations, config)


def fit_spheroid_weighted(points3, beta_steps: int = DEFAULT_BETA_STEPS,
                          inner_iterations: int = DEFAULT_INNER_ITERATIONS,
                          config: DescentConfig = DescentConfig()) -> FitReport:
    return _weighted(points3, 3, beta_steps, inner_iterations, config)


__all__ = [
    "DegenerateDataError",
    "FitReport",
    "GeometryError",
    "InitEstimate",
    "compute_Pa",
    "compute_Pb",
    "estimate_sigma_by_escape",
    "estimate_sigma_from_fit",
    "fit_axial_guided",
    "fit_penalized",
    "fit_raw",
    "fit_spheroid_penalized",
    "fit_spheroid_raw",
    "fit_spheroid_weighted",
    "fit_weighted",
    "initialize",
    "quantile_size",
]
