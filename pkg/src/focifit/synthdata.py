"""Seeded synthetic ellipse and spheroid datasets, plus CSV import/export.

Points are drawn uniformly in the parametric angle and corrupted with i.i.d.
Gaussian noise of covariance ``noise_variance * I``. Randomness comes from
NumPy's PCG64 bit generator seeded directly with the integer seed, whose
output stream is fixed and platform independent.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .geometry import CanonicalEllipse, CanonicalSpheroid


@dataclass(frozen=True)
class GeneratorSpec:
    shape: Union[CanonicalEllipse, CanonicalSpheroid]
    n_points: int
    noise_variance: float
    seed: int
    # "uniform_cos": polar angle with uniform cosine; "uniform": uniform polar angle
    polar_sampling: str = "uniform_cos"

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if not self.noise_variance >= 0:
            raise ValueError("noise_variance must be >= 0")
        if self.polar_sampling not in ("uniform_cos", "uniform"):
            raise ValueError(f"unknown polar_sampling {self.polar_sampling!r}")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))


def generate_ellipse_points(spec: GeneratorSpec):
    """Return ``(observed, true)`` arrays of shape ``(n, 2)``."""
    if not isinstance(spec.shape, CanonicalEllipse):
        raise TypeError("generate_ellipse_points needs a CanonicalEllipse shape")
    rng = make_rng(spec.seed)
    theta = rng.uniform(0.0, 2.0 * math.pi, spec.n_points)
    true = spec.shape.points(theta)
    noise = rng.standard_normal((spec.n_points, 2)) * math.sqrt(spec.noise_variance)
    return true + noise, true


def generate_spheroid_points(spec: GeneratorSpec):
    """Return ``(observed, true)`` arrays of shape ``(n, 3)``."""
    if not isinstance(spec.shape, CanonicalSpheroid):
        raise TypeError("generate_spheroid_points needs a CanonicalSpheroid shape")
    rng = make_rng(spec.seed)
    theta = rng.uniform(0.0, 2.0 * math.pi, spec.n_points)
    if spec.polar_sampling == "uniform_cos":
        psi = np.arccos(rng.uniform(-1.0, 1.0, spec.n_points))
    else:
        psi = rng.uniform(0.0, math.pi, spec.n_points)
    true = spec.shape.points(theta, psi)
    noise = rng.standard_normal((spec.n_points, 3)) * math.sqrt(spec.noise_variance)
    return true + noise, true


def rotation_axis(yaw_deg: float, pitch_deg: float) -> np.ndarray:
    """Unit direction obtained by rotating the x-axis by yaw (about z) then pitch."""
    yaw, pitch = math.radians(yaw_deg), math.radians(pitch_deg)
    return np.array(
        [math.cos(pitch) * math.cos(yaw), math.cos(pitch) * math.sin(yaw), math.sin(pitch)]
    )


_COLUMNS = ("x", "y", "z")


def points_to_csv(points) -> str:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise ValueError("points must have shape (n, 2) or (n, 3)")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_COLUMNS[: pts.shape[1]])
    for row in pts:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_points_csv(path, points) -> None:
    Path(path).write_text(points_to_csv(points), encoding="utf-8", newline="\n")


def read_points_csv(path) -> np.ndarray:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if tuple(header) not in (_COLUMNS[:2], _COLUMNS):
            raise ValueError(f"expected header x,y or x,y,z; got {','.join(header)}")
        rows = [[float(v) for v in row] for row in reader if row]
    pts = np.array(rows, dtype=float).reshape(-1, len(header))
    return pts
