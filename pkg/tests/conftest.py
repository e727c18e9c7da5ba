import math

import numpy as np
import pytest

from focifit.geometry import CanonicalEllipse, CanonicalSpheroid


def central_diff(fun, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12))


def exact_points(shape, n=50):
    theta = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    return shape.points(theta)


@pytest.fixture
def ellipse53():
    return CanonicalEllipse((0.0, 0.0), 5.0, 3.0, 0.0)


@pytest.fixture
def rotated_spheroid():
    axis = np.array([1.0, 1.0, 0.5]) / np.linalg.norm([1.0, 1.0, 0.5])
    return CanonicalSpheroid((0.5, -1.0, 2.0), 5.0, 1.0, axis)


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record and print one PASS/FAIL line; returns the condition for asserting."""

    def record(label, ok, detail=""):
        line = f"CRITERION {label}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
