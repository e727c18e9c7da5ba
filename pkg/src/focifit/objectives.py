"""Focal-distance objectives and their analytic gradients.

All objectives act on ``(c1, c2, a)`` for an ``(n, d)`` point array with
``d`` equal to 2 (ellipse) or 3 (spheroid). The residual of a point is

    r_i = |z_i - c1| + |z_i - c2| - 2a

and the plain objective is the mean squared residual. The penalized variant
adds ``lam * a_max * sigma * exp((a / a_max)**4)``; the weighted variant
scales each squared residual by a fixed weight ``1 / (1 + beta * cos(zeta_i))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    COINCIDENCE_TOL,
    FocusCoincidenceError,
    PointDiagnostics,
    cos_zetas,
)

# Lower clamp for cos(zeta) so that beta = 1 weights stay finite.
COS_ZETA_FLOOR = -1.0 + 1e-9


class WeightCountError(ValueError):
    pass


@dataclass(frozen=True)
class ObjectiveEval:
    value: float
    grad_c1: np.ndarray
    grad_c2: np.ndarray
    grad_a: float
    residuals: np.ndarray
    contributions: np.ndarray
    cos_zeta: np.ndarray

    @property
    def gradient(self) -> np.ndarray:
        """Gradient flattened in the ``[c1, c2, a]`` parameter layout."""
        return np.concatenate([self.grad_c1, self.grad_c2, [self.grad_a]])

    @property
    def diagnostics(self) -> list[PointDiagnostics]:
        return [
            PointDiagnostics(float(r), float(f), float(c))
            for r, f, c in zip(self.residuals, self.contributions, self.cos_zeta)
        ]


@dataclass(frozen=True)
class WeightSet:
    weights: np.ndarray
    beta: float


def split_params(x):
    """Split a flat ``[c1, c2, a]`` vector into its parts."""
    x = np.asarray(x, dtype=float)
    d = (x.size - 1) // 2
    return x[:d], x[d : 2 * d], float(x[-1])


def _focal_terms(points, c1, c2):
    u1 = c1 - points
    u2 = c2 - points
    d1 = np.sqrt(np.einsum("ij,ij->i", u1, u1))
    d2 = np.sqrt(np.einsum("ij,ij->i", u2, u2))
    if d1.min() < COINCIDENCE_TOL or d2.min() < COINCIDENCE_TOL:
        raise FocusCoincidenceError("a data point coincides with a focus")
    return u1, u2, d1, d2


def value_and_grad(points, x, weights=None):
    """Fast path used by the optimizer: (weighted) geometric value and flat gradient."""
    c1, c2, a = split_params(x)
    u1, u2, d1, d2 = _focal_terms(points, c1, c2)
    r = d1 + d2 - 2.0 * a
    wr = r if weights is None else weights * r
    n = points.shape[0]
    value = float(np.dot(wr, r)) / n
    g1 = (2.0 / n) * ((wr / d1) @ u1)
    g2 = (2.0 / n) * ((wr / d2) @ u2)
    ga = -(4.0 / n) * float(wr.sum())
    return value, np.concatenate([g1, g2, [ga]])


def _evaluate(points, c1, c2, a, weights=None) -> ObjectiveEval:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError("points must be a non-empty (n, d) array")
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    u1, u2, d1, d2 = _focal_terms(points, c1, c2)
    r = d1 + d2 - 2.0 * a
    f = r * r
    wr = r if weights is None else weights * r
    n = points.shape[0]
    value = float(np.mean(f if weights is None else weights * f))
    cz = np.clip(np.einsum("ij,ij->i", u1, u2) / (d1 * d2), -1.0, 1.0)
    return ObjectiveEval(
        value=value,
        grad_c1=(2.0 / n) * ((wr / d1) @ u1),
        grad_c2=(2.0 / n) * ((wr / d2) @ u2),
        grad_a=-(4.0 / n) * float(wr.sum()),
        residuals=r,
        contributions=f,
        cos_zeta=cz,
    )


def eval_geometric(points, c1, c2, a) -> ObjectiveEval:
    """Mean squared focal-distance residual and its exact gradient."""
    return _evaluate(points, c1, c2, float(a))


def penalty(a: float, lam: float, a_max_hat: float, sigma_hat: float):
    """Penalty value and its derivative with respect to ``a``."""
    scale = lam * a_max_hat * sigma_hat
    if scale == 0.0:
        return 0.0, 0.0
    t = a / a_max_hat
    try:
        e = math.exp(t**4)
    except OverflowError:
        return math.inf, math.inf
    return scale * e, scale * e * 4.0 * t**3 / a_max_hat


def eval_penalized(points, c1, c2, a, lam, a_max_hat, sigma_hat) -> ObjectiveEval:
    """Geometric objective plus the exponential size penalty on ``a``."""
    if lam < 0 or a_max_hat <= 0 or sigma_hat < 0:
        raise ValueError("need lam >= 0, a_max_hat > 0 and sigma_hat >= 0")
    base = _evaluate(points, c1, c2, float(a))
    p, dp = penalty(float(a), lam, a_max_hat, sigma_hat)
    return ObjectiveEval(
        value=base.value + p,
        grad_c1=base.grad_c1,
        grad_c2=base.grad_c2,
        grad_a=base.grad_a + dp,
        residuals=base.residuals,
        contributions=base.contributions,
        cos_zeta=base.cos_zeta,
    )


def eval_weighted(points, c1, c2, a, weights: WeightSet) -> ObjectiveEval:
    w = np.asarray(weights.weights, dtype=float)
    n = np.asarray(points).shape[0]
    if w.shape != (n,):
        raise WeightCountError(f"got {w.size} weights for {n} points")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and strictly positive")
    return _evaluate(points, c1, c2, float(a), w)


def compute_weights(points, c1, c2, a, beta: float) -> WeightSet:
    """Per-point weights ``1 / (1 + beta * cos(zeta_i))`` at the given foci.

    ``a`` does not enter the weights; it is accepted so callers can pass a
    full parameter set.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    cz = np.maximum(cos_zetas(points, c1, c2), COS_ZETA_FLOOR)
    return WeightSet(1.0 / (1.0 + beta * cz), float(beta))
