"""Area-overlap error rate and auxiliary comparison statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import CanonicalEllipse


@dataclass(frozen=True)
class ErrorRateConfig:
    grid_resolution: int = 2000
    padding: float = 0.05
    # rows evaluated per chunk; bounds memory, does not change the result
    chunk_rows: int = 250

    def __post_init__(self):
        if self.grid_resolution < 100:
            raise ValueError("grid_resolution must be at least 100")
        if self.padding < 0:
            raise ValueError("padding must be non-negative")


def _half_extent(e: CanonicalEllipse):
    cp, sp = math.cos(e.phi), math.sin(e.phi)
    wx = math.hypot(e.a * cp, e.b * sp)
    wy = math.hypot(e.a * sp, e.b * cp)
    return wx, wy


def _quadratic_form(e: CanonicalEllipse):
    cp, sp = math.cos(e.phi), math.sin(e.phi)
    ia2, ib2 = 1.0 / e.a**2, 1.0 / e.b**2
    qa = cp * cp * ia2 + sp * sp * ib2
    qb = 2.0 * cp * sp * (ia2 - ib2)
    qc = sp * sp * ia2 + cp * cp * ib2
    return qa, qb, qc


def _inside(e, qf, X, Y):
    dx = X - e.center[0]
    dy = Y - e.center[1]
    qa, qb, qc = qf
    return qa * dx * dx + qb * dx * dy + qc * dy * dy <= 1.0


def _grid(e1, e2, cfg):
    boxes = []
    for e in (e1, e2):
        wx, wy = _half_extent(e)
        boxes.append((e.center[0] - wx, e.center[0] + wx, e.center[1] - wy, e.center[1] + wy))
    x0 = min(b[0] for b in boxes)
    x1 = max(b[1] for b in boxes)
    y0 = min(b[2] for b in boxes)
    y1 = max(b[3] for b in boxes)
    px, py = cfg.padding * (x1 - x0), cfg.padding * (y1 - y0)
    x0, x1, y0, y1 = x0 - px, x1 + px, y0 - py, y1 + py
    n = cfg.grid_resolution
    hx, hy = (x1 - x0) / n, (y1 - y0) / n
    return x0, y0, hx, hy, n


def _row_intervals(e, ys, x0, hx, n):
    """Index range ``[lo, hi)`` of grid midpoints inside ``e`` on each row."""
    qa, qb, qc = _quadratic_form(e)
    dy = ys - e.center[1]
    # qa t^2 + (qb dy) t + (qc dy^2 - 1) <= 0 with t = x - xc
    disc = (qb * dy) ** 2 - 4.0 * qa * (qc * dy * dy - 1.0)
    root = np.sqrt(np.maximum(disc, 0.0))
    t_lo = (-qb * dy - root) / (2.0 * qa)
    t_hi = (-qb * dy + root) / (2.0 * qa)
    lo = np.ceil((e.center[0] + t_lo - x0) / hx - 0.5)
    hi = np.floor((e.center[0] + t_hi - x0) / hx - 0.5) + 1.0
    lo = np.clip(lo, 0, n)
    hi = np.clip(hi, 0, n)
    empty = (disc < 0) | (hi <= lo)
    lo[empty] = 0
    hi[empty] = 0
    return lo, hi


def symmetric_difference_area(e1: CanonicalEllipse, e2: CanonicalEllipse,
                              cfg: ErrorRateConfig = ErrorRateConfig()) -> float:
    """Area of ``e1 XOR e2`` by midpoint-rule integration on a regular grid.

    Each grid row meets an ellipse in a single interval, so the indicator
    count per row is obtained from the interval end points instead of
    testing every cell.
    """
    x0, y0, hx, hy, n = _grid(e1, e2, cfg)
    ys = y0 + hy * (np.arange(n) + 0.5)
    lo1, hi1 = _row_intervals(e1, ys, x0, hx, n)
    lo2, hi2 = _row_intervals(e2, ys, x0, hx, n)
    both = np.maximum(np.minimum(hi1, hi2) - np.maximum(lo1, lo2), 0.0)
    count = float(np.sum((hi1 - lo1) + (hi2 - lo2) - 2.0 * both))
    return count * hx * hy


def symmetric_difference_area_bruteforce(e1, e2, cfg: ErrorRateConfig = ErrorRateConfig()) -> float:
    """Cell-by-cell version of :func:`symmetric_difference_area` (slow; for checking)."""
    x0, y0, hx, hy, n = _grid(e1, e2, cfg)
    xs = x0 + hx * (np.arange(n) + 0.5)
    ys = y0 + hy * (np.arange(n) + 0.5)
    q1, q2 = _quadratic_form(e1), _quadratic_form(e2)
    count = 0
    for start in range(0, n, cfg.chunk_rows):
        Y, X = np.meshgrid(ys[start : start + cfg.chunk_rows], xs, indexing="ij")
        count += int(np.count_nonzero(_inside(e1, q1, X, Y) ^ _inside(e2, q2, X, Y)))
    return count * hx * hy


def error_rate(true_e: CanonicalEllipse, fitted_e: CanonicalEllipse,
               cfg: ErrorRateConfig = ErrorRateConfig()) -> float:
    """Normalized area difference ``(S_union - S_intersection) / (2 S_true)``.

    The symmetric-difference area is integrated on a grid over the joint
    padded bounding box; the true area in the denominator is ``pi a b``.
    The result is non-negative and unbounded above (a huge fitted ellipse
    gives a large value).

    Examples
    --------
    >>> unit = CanonicalEllipse((0, 0), 1, 1, 0)
    >>> big = CanonicalEllipse((0, 0), math.sqrt(2), math.sqrt(2), 0)
    >>> abs(error_rate(unit, big) - 0.5) < 1e-3
    True
    """
    return symmetric_difference_area(true_e, fitted_e, cfg) / (2.0 * true_e.area)


def axis_direction_error(true_dir, fitted_dir) -> float:
    """Unsigned angle between two axis directions, in degrees within [0, 90]."""
    u = np.asarray(true_dir, dtype=float)
    v = np.asarray(fitted_dir, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("axis directions must be nonzero")
    c = min(abs(float(np.dot(u, v))) / (nu * nv), 1.0)
    return math.degrees(math.acos(c))


def quantile_summary(values, probs) -> list[float]:
    """Nearest-rank quantiles: the ``ceil(p n)``-th smallest value (minimum at p=0)."""
    vals = np.sort(np.asarray(values, dtype=float))
    if vals.size == 0:
        raise ValueError("values must be non-empty")
    out = []
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
        k = max(math.ceil(p * vals.size), 1)
        out.append(float(vals[k - 1]))
    return out
