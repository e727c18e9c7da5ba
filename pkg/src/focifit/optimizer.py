"""Gradient descent with Armijo backtracking over a flat parameter vector."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .geometry import FocusCoincidenceError


class StopReason(str, enum.Enum):
    GRADIENT_SMALL = "gradient_small"
    OBJECTIVE_STALLED = "objective_stalled"
    MAX_ITERATIONS = "max_iterations"
    EARLY_STOP = "early_stop_predicate"


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DescentConfig:
    max_iterations: int = 5000
    grad_tolerance: float = 1e-8
    rel_obj_tolerance: float = 1e-12
    initial_step: float = 1.0
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4
    max_backtracks: int = 60

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        for name in ("grad_tolerance", "initial_step", "armijo_c"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.rel_obj_tolerance < 0:
            raise ValueError("rel_obj_tolerance must be non-negative")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")

    def with_(self, **changes) -> "DescentConfig":
        return replace(self, **changes)


@dataclass
class DescentTrace:
    values: list[float]
    params: np.ndarray
    iterations: int
    converged: bool
    stop_reason: StopReason
    grad_norm: float = float("nan")
    evaluations: int = 0

    @property
    def final_value(self) -> float:
        return self.values[-1]

    def is_monotone(self) -> bool:
        v = np.asarray(self.values)
        return bool(np.all(np.diff(v) <= 0.0))


Evaluator = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


def descend(
    evaluate: Evaluator,
    x0,
    config: DescentConfig = DescentConfig(),
    early_stop: Optional[Callable[[np.ndarray], bool]] = None,
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    jitter: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> DescentTrace:
    """Minimize ``evaluate`` by steepest descent with backtracking.

    Parameters
    ----------
    evaluate : callable
        Maps a parameter vector to ``(value, gradient)``.
    x0 : array_like
        Starting parameters.
    config : DescentConfig
        Iteration budget, tolerances and line-search constants.
    early_stop : callable, optional
        Predicate on the current parameters, checked before every iteration.
        Descent stops as soon as it returns True.
    project : callable, optional
        Applied to every trial point (e.g. to keep a size parameter positive).
    jitter : callable, optional
        Used once to perturb a point at which ``evaluate`` raised
        :class:`FocusCoincidenceError`; a second failure aborts.

    Returns
    -------
    DescentTrace
        Objective values start with the value at ``x0`` and are
        non-increasing.
    """
    x = np.array(x0, dtype=float)
    if project is not None:
        x = project(x)
    n_eval = 0

    def safe_eval(p):
        nonlocal n_eval
        n_eval += 1
        try:
            return p, evaluate(p)
        except FocusCoincidenceError:
            if jitter is None:
                raise OptimizationError("objective undefined at trial point") from None
            q = jitter(p)
            n_eval += 1
            try:
                return q, evaluate(q)
            except FocusCoincidenceError as exc:
                raise OptimizationError(
                    f"objective undefined even after jitter: {exc}"
                ) from exc

    x, (f, g) = safe_eval(x)
    if not np.isfinite(f):
        raise OptimizationError("objective is not finite at the starting point")
    values = [f]
    reason = StopReason.MAX_ITERATIONS
    it = 0
    gnorm = float(np.linalg.norm(g))
    while True:
        if gnorm <= config.grad_tolerance:
            reason = StopReason.GRADIENT_SMALL
            break
        if early_stop is not None and early_stop(x):
            reason = StopReason.EARLY_STOP
            break
        if it >= config.max_iterations:
            reason = StopReason.MAX_ITERATIONS
            break
        g2 = gnorm * gnorm
        t = config.initial_step
        accepted = False
        for _ in range(config.max_backtracks):
            trial = x - t * g
            if project is not None:
                trial = project(trial)
            trial, (f_new, g_new) = safe_eval(trial)
            if np.isfinite(f_new) and f_new <= f - config.armijo_c * t * g2:
                accepted = True
                break
            t *= config.backtrack_factor
        if not accepted or f_new > f:
            reason = StopReason.OBJECTIVE_STALLED
            break
        it += 1
        decrease = f - f_new
        x, f, g = trial, f_new, g_new
        gnorm = float(np.linalg.norm(g))
        values.append(f)
        if decrease <= config.rel_obj_tolerance * max(abs(f), 1e-300):
            reason = StopReason.OBJECTIVE_STALLED
            if gnorm <= config.grad_tolerance:
                reason = StopReason.GRADIENT_SMALL
            break

    converged = reason in (StopReason.GRADIENT_SMALL, StopReason.OBJECTIVE_STALLED)
    return DescentTrace(
        values=values,
        params=x,
        iterations=it,
        converged=converged,
        stop_reason=reason,
        grad_norm=gnorm,
        evaluations=n_eval,
    )
