import numpy as np
import pytest

from conftest import exact_points
from focifit.fitters import initialize
from focifit.geometry import FocusCoincidenceError
from focifit.objectives import value_and_grad
from focifit.optimizer import DescentConfig, OptimizationError, StopReason, descend


def bowl(p):
    return float(p @ p), 2 * p


def test_quadratic_bowl():
    tr = descend(bowl, [3.0, 4.0])
    assert np.linalg.norm(tr.params) < 1e-6
    assert tr.converged
    assert tr.is_monotone()


def test_zero_gradient_start():
    tr = descend(bowl, [0.0, 0.0])
    assert tr.iterations == 0
    assert tr.converged
    assert tr.stop_reason == StopReason.GRADIENT_SMALL
    assert tr.values == [0.0]


def test_exact_ellipse_descent(ellipse53):
    pts = exact_points(ellipse53)
    init = initialize(pts)
    tr = descend(lambda x: value_and_grad(pts, x), init.as_vector())
    assert tr.final_value < 1e-10
    assert tr.is_monotone()


def test_max_iterations():
    tr = descend(bowl, [3.0, 4.0], DescentConfig(max_iterations=1, initial_step=0.1))
    assert tr.iterations == 1
    assert tr.stop_reason == StopReason.MAX_ITERATIONS
    assert not tr.converged


def test_early_stop():
    tr = descend(bowl, [3.0, 4.0], early_stop=lambda x: True)
    assert tr.iterations == 0
    assert tr.stop_reason == StopReason.EARLY_STOP


def test_projection_applied():
    tr = descend(bowl, [3.0, 4.0], project=lambda x: np.maximum(x, 1.0))
    np.testing.assert_allclose(tr.params, [1.0, 1.0])


def test_deterministic():
    f = lambda x: (float(np.sum(x**4) + x[0] * x[1]), 4 * x**3 + x[::-1])
    t1 = descend(f, [1.5, -2.0])
    t2 = descend(f, [1.5, -2.0])
    assert t1.values == t2.values
    np.testing.assert_array_equal(t1.params, t2.params)


def test_jitter_once_then_fail():
    calls = []

    def bad(x):
        calls.append(x.copy())
        raise FocusCoincidenceError("x")

    with pytest.raises(OptimizationError):
        descend(bad, [1.0], jitter=lambda x: x + 1e-9)
    assert len(calls) == 2


def test_jitter_recovers():
    def f(x):
        if x[0] == 2.0:
            raise FocusCoincidenceError("x")
        return bowl(x)

    tr = descend(f, [2.0], jitter=lambda x: x + 1e-9)
    assert abs(tr.params[0]) < 1e-6


def test_config_validation():
    with pytest.raises(ValueError):
        DescentConfig(backtrack_factor=1.5)
    with pytest.raises(ValueError):
        DescentConfig(max_iterations=-1)
    assert DescentConfig().with_(max_iterations=3).max_iterations == 3


def test_dimension_agnostic():
    tr = descend(bowl, np.arange(7, dtype=float))
    assert np.linalg.norm(tr.params) < 1e-6
