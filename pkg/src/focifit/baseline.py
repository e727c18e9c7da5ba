"""Direct least-squares ellipse fit (numerically stable block formulation).

Minimizes the algebraic distance ``sum (A x^2 + B xy + C y^2 + D x + E y + F)^2``
subject to ``4AC - B^2 = 1``. The design matrix is split into its quadratic
and linear halves so the constrained problem reduces to a 3x3 eigenproblem;
the linear coefficients are then back-solved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fitters import DegenerateDataError, FitReport
from .geometry import (
    CanonicalEllipse,
    ConicCoefficients,
    canonical_to_conic,
    canonical_to_foci,
    conic_to_canonical,
)

# inverse of the constraint matrix encoding 4AC - B^2
_C1_INV = np.array([[0.0, 0.0, 0.5], [0.0, -1.0, 0.0], [0.5, 0.0, 0.0]])


class FitFailureError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScatterDecomposition:
    D1: np.ndarray
    D2: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    S3: np.ndarray
    T: np.ndarray
    M: np.ndarray


def scatter_decomposition(x, y) -> ScatterDecomposition:
    D1 = np.column_stack([x * x, x * y, y * y])
    D2 = np.column_stack([x, y, np.ones_like(x)])
    S1 = D1.T @ D1
    S2 = D1.T @ D2
    S3 = D2.T @ D2
    if np.linalg.cond(S3) > 1e14:
        raise DegenerateDataError("linear scatter matrix is singular (collinear points?)")
    T = -np.linalg.solve(S3, S2.T)
    M = _C1_INV @ (S1 + S2 @ T)
    return ScatterDecomposition(D1, D2, S1, S2, S3, T, M)


def fit_algebraic(points) -> FitReport:
    """Constrained algebraic ellipse fit.

    Points are centered and scaled to unit RMS radius before fitting; the
    result is mapped back to the original frame.

    Raises
    ------
    DegenerateDataError
        Too few points, or points collinear/coincident.
    FitFailureError
        No eigenvector satisfies the ellipse constraint.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected an (n, 2) point array")
    if pts.shape[0] < 6:
        raise DegenerateDataError(f"need at least 6 points, got {pts.shape[0]}")
    mean = pts.mean(axis=0)
    centered = pts - mean
    scale = float(np.sqrt(np.mean(np.sum(centered**2, axis=1))))
    if scale == 0.0:
        raise DegenerateDataError("all points are identical")
    u = centered / scale
    dec = scatter_decomposition(u[:, 0], u[:, 1])

    vals, vecs = np.linalg.eig(dec.M)
    vals, vecs = vals.real, vecs.real
    cond = 4.0 * vecs[0] * vecs[2] - vecs[1] ** 2
    ok = np.flatnonzero(cond > 0)
    if ok.size == 0:
        raise FitFailureError("no ellipse-type eigenvector")
    best = ok[np.argmin(np.abs(vals[ok]))]
    quad = vecs[:, best]
    coef = np.concatenate([quad, dec.T @ quad])
    try:
        local = conic_to_canonical(ConicCoefficients(*coef))
    except ValueError as exc:
        raise FitFailureError(str(exc)) from exc
    canonical = CanonicalEllipse(
        mean + scale * local.center, scale * local.a, scale * local.b, local.phi
    )
    return FitReport(
        "algebraic_baseline", canonical, canonical_to_foci(canonical),
        extras={"conic": canonical_to_conic(canonical)},
    )
