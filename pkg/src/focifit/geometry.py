"""Ellipse and spheroid parameterizations and conversions between them.

Three equivalent descriptions of a 2-D ellipse are used throughout the
package:

* foci form ``(c1, c2, a)``: the locus ``|z - c1| + |z - c2| = 2a``;
* canonical form ``(center, a, b, phi)`` with ``a >= b > 0`` and the major
  axis orientation ``phi`` folded into ``[0, pi)``;
* conic coefficients ``(A, B, C, D, E, F)`` of
  ``A x^2 + B xy + C y^2 + D x + E y + F = 0``.

Foci-form spheroids are the 3-D analogue (prolate: the surface of revolution
about the focal axis).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Foci closer than this (relative to a) are treated as a circle / sphere.
CIRCLE_TOL = 1e-12
# Distance below which a point counts as sitting on a focus.
COINCIDENCE_TOL = 1e-12


class GeometryError(ValueError):
    """Invalid or degenerate shape parameters."""


class FocusCoincidenceError(GeometryError):
    """A data point coincides with a focus, so the focal angle is undefined."""


def _as_point(p, dim=None) -> np.ndarray:
    arr = np.array(p, dtype=float).reshape(-1)
    if dim is not None and arr.shape != (dim,):
        raise GeometryError(f"expected a {dim}-D point, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GeometryError("point coordinates must be finite")
    arr.flags.writeable = False
    return arr


def fold_angle(phi: float) -> float:
    """Reduce an axis orientation modulo pi into ``[0, pi)``."""
    phi = math.fmod(phi, math.pi)
    if phi < 0.0:
        phi += math.pi
    if phi >= math.pi:
        phi = 0.0
    return phi + 0.0


def normalize_axis(v) -> np.ndarray:
    """Unit vector with the sign fixed so its first nonzero component is > 0."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0 or not np.isfinite(norm):
        raise GeometryError("cannot normalize a zero or non-finite axis")
    v = v / norm
    for comp in v:
        if abs(comp) > 1e-15:
            if comp < 0:
                v = -v
            break
    return v


@dataclass(frozen=True)
class FociEllipse:
    """Ellipse given by its two foci and semi-major length."""

    c1: np.ndarray
    c2: np.ndarray
    a: float

    def __post_init__(self):
        dim = getattr(self, "dim", 2)
        object.__setattr__(self, "c1", _as_point(self.c1, dim))
        object.__setattr__(self, "c2", _as_point(self.c2, dim))
        object.__setattr__(self, "a", float(self.a))
        if not math.isfinite(self.a) or self.a <= 0:
            raise GeometryError(f"semi-major length must be positive, got {self.a}")
        if self.a <= self.linear_eccentricity:
            raise GeometryError(
                f"a={self.a} must exceed half the focal distance "
                f"{self.linear_eccentricity}"
            )

    @property
    def linear_eccentricity(self) -> float:
        return 0.5 * float(np.linalg.norm(self.c2 - self.c1))

    @property
    def b(self) -> float:
        c = self.linear_eccentricity
        return math.sqrt((self.a - c) * (self.a + c))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.c1 + self.c2)

    def as_vector(self) -> np.ndarray:
        """Flat parameter vector ``[c1, c2, a]``."""
        return np.concatenate([self.c1, self.c2, [self.a]])

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float)
        d = (x.size - 1) // 2
        return cls(x[:d], x[d : 2 * d], x[-1])

    def residuals(self, points) -> np.ndarray:
        """Focal-distance residuals ``|z-c1| + |z-c2| - 2a`` for each point."""
        pts = np.asarray(points, dtype=float)
        d1 = np.linalg.norm(pts - self.c1, axis=1)
        d2 = np.linalg.norm(pts - self.c2, axis=1)
        return d1 + d2 - 2.0 * self.a


@dataclass(frozen=True)
class FociSpheroid(FociEllipse):
    """Prolate spheroid ``|z - c1| + |z - c2| = 2a`` in 3-D."""

    dim: int = field(default=3, init=False, repr=False)


@dataclass(frozen=True)
class CanonicalEllipse:
    """Center, semi-axes ``a >= b > 0`` and major-axis orientation in ``[0, pi)``."""

    center: np.ndarray
    a: float
    b: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center, 2))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "phi", float(self.phi))
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise GeometryError("semi-axes must be finite")
        if not self.a >= self.b > 0:
            raise GeometryError(f"need a >= b > 0, got a={self.a}, b={self.b}")
        if not 0.0 <= self.phi < math.pi:
            raise GeometryError(f"phi must lie in [0, pi), got {self.phi}")

    @classmethod
    def normalized(cls, center, a: float, b: float, phi: float) -> "CanonicalEllipse":
        """Build from arbitrary semi-axes and angle, swapping axes if ``b > a``."""
        if b > a:
            a, b = b, a
            phi += 0.5 * math.pi
        if a - b <= CIRCLE_TOL * a:
            phi = 0.0
        return cls(center, a, b, fold_angle(phi))

    @property
    def axis(self) -> np.ndarray:
        return np.array([math.cos(self.phi), math.sin(self.phi)])

    @property
    def area(self) -> float:
        return math.pi * self.a * self.b

    def points(self, theta) -> np.ndarray:
        """Points on the curve at parametric angles ``theta``."""
        theta = np.asarray(theta, dtype=float)
        cp, sp = math.cos(self.phi), math.sin(self.phi)
        u = self.a * np.cos(theta)
        v = self.b * np.sin(theta)
        return np.column_stack(
            [self.center[0] + cp * u - sp * v, self.center[1] + sp * u + cp * v]
        )

    def to_local(self, points) -> np.ndarray:
        """Rotate/translate points into the frame where the ellipse is standard."""
        pts = np.asarray(points, dtype=float) - self.center
        cp, sp = math.cos(self.phi), math.sin(self.phi)
        return np.column_stack(
            [cp * pts[:, 0] + sp * pts[:, 1], -sp * pts[:, 0] + cp * pts[:, 1]]
        )


@dataclass(frozen=True)
class CanonicalSpheroid:
    """Center, semi-major ``a``, equal semi-minors ``b`` and unit major axis."""

    center: np.ndarray
    a: float
    b: float
    axis: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center, 3))
        axis = normalize_axis(_as_point(self.axis, 3))
        axis.flags.writeable = False
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not self.a >= self.b > 0:
            raise GeometryError(f"need a >= b > 0, got a={self.a}, b={self.b}")

    def frame(self) -> np.ndarray:
        """Orthonormal basis with the major axis as the first row."""
        return orthonormal_frame(self.axis)

    def points(self, theta, psi) -> np.ndarray:
        """Surface points; ``psi`` is the polar angle from the major axis."""
        theta = np.asarray(theta, dtype=float)
        psi = np.asarray(psi, dtype=float)
        u, e1, e2 = self.frame()
        local = (
            self.a * np.cos(psi)[:, None] * u
            + self.b * (np.sin(psi) * np.cos(theta))[:, None] * e1
            + self.b * (np.sin(psi) * np.sin(theta))[:, None] * e2
        )
        return self.center + local

    def surface_residuals(self, points) -> np.ndarray:
        """Implicit-equation residual ``(s/a)^2 + (t/b)^2 - 1`` per point."""
        rel = np.asarray(points, dtype=float) - self.center
        s = rel @ self.axis
        t2 = np.sum(rel * rel, axis=1) - s * s
        return (s / self.a) ** 2 + t2 / self.b**2 - 1.0


def orthonormal_frame(axis) -> np.ndarray:
    """Rows ``(axis, e1, e2)`` forming a right-handed orthonormal basis."""
    u = np.asarray(axis, dtype=float)
    u = u / np.linalg.norm(u)
    helper = np.eye(3)[int(np.argmin(np.abs(u)))]
    e1 = np.cross(u, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    return np.vstack([u, e1, e2])


@dataclass(frozen=True)
class ConicCoefficients:
    A: float
    B: float
    C: float
    D: float
    E: float
    F: float

    def __post_init__(self):
        for name in "ABCDEF":
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.A == 0 and self.B == 0 and self.C == 0:
            raise GeometryError("quadratic coefficients are all zero")

    @property
    def discriminant(self) -> float:
        return self.B * self.B - 4.0 * self.A * self.C

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.B, self.C, self.D, self.E, self.F])

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        x, y = pts[:, 0], pts[:, 1]
        return (
            self.A * x * x + self.B * x * y + self.C * y * y
            + self.D * x + self.E * y + self.F
        )


@dataclass(frozen=True)
class PointDiagnostics:
    """Per-point residual, squared contribution and focal-angle cosine."""

    residual: float
    contribution: float
    cos_zeta: float


def foci_to_canonical(e: FociEllipse) -> CanonicalEllipse:
    """Center, semi-axes and orientation of a foci-form ellipse.

    Examples
    --------
    >>> e = foci_to_canonical(FociEllipse((-1, 0), (1, 0), math.sqrt(2)))
    >>> round(e.b, 12), e.phi
    (1.0, 0.0)
    """
    if e.c1.shape != (2,):
        raise GeometryError("foci_to_canonical expects a 2-D ellipse")
    d = e.c2 - e.c1
    dist = float(np.hypot(d[0], d[1]))
    c = 0.5 * dist
    if e.a <= c:
        raise GeometryError("a must exceed the linear eccentricity")
    b = math.sqrt((e.a - c) * (e.a + c))
    phi = 0.0 if dist < CIRCLE_TOL * e.a else fold_angle(math.atan2(d[1], d[0]))
    return CanonicalEllipse(e.center, e.a, b, phi)


def canonical_to_foci(e: CanonicalEllipse) -> FociEllipse:
    c = math.sqrt(max((e.a - e.b) * (e.a + e.b), 0.0))
    offset = c * e.axis
    return FociEllipse(e.center - offset, e.center + offset, e.a)


def spheroid_to_canonical(s: FociSpheroid) -> CanonicalSpheroid:
    d = s.c2 - s.c1
    dist = float(np.linalg.norm(d))
    c = 0.5 * dist
    b = math.sqrt((s.a - c) * (s.a + c))
    axis = np.array([1.0, 0.0, 0.0]) if dist < CIRCLE_TOL * s.a else d
    return CanonicalSpheroid(s.center, s.a, b, axis)


def canonical_to_spheroid(s: CanonicalSpheroid) -> FociSpheroid:
    c = math.sqrt(max((s.a - s.b) * (s.a + s.b), 0.0))
    offset = c * s.axis
    return FociSpheroid(s.center - offset, s.center + offset, s.a)


def _normalize_conic(coef: np.ndarray) -> ConicCoefficients:
    if abs(coef[5]) > 1e-12:
        coef = coef / -coef[5]
    else:
        coef = coef / np.linalg.norm(coef)
    return ConicCoefficients(*coef)


def canonical_to_conic(e: CanonicalEllipse) -> ConicCoefficients:
    """Implicit conic coefficients, scaled so that ``F = -1`` when possible."""
    cp, sp = math.cos(e.phi), math.sin(e.phi)
    a2, b2 = e.a * e.a, e.b * e.b
    A = a2 * sp * sp + b2 * cp * cp
    B = 2.0 * (b2 - a2) * sp * cp
    C = a2 * cp * cp + b2 * sp * sp
    xc, yc = e.center
    D = -2.0 * A * xc - B * yc
    E = -B * xc - 2.0 * C * yc
    F = A * xc * xc + B * xc * yc + C * yc * yc - a2 * b2
    return _normalize_conic(np.array([A, B, C, D, E, F]))


def conic_to_canonical(q: ConicCoefficients) -> CanonicalEllipse:
    """Reduce an ellipse-type conic to center, semi-axes and orientation."""
    if q.discriminant >= 0:
        raise GeometryError(
            f"not an ellipse: B^2 - 4AC = {q.discriminant:.6g} >= 0"
        )
    Q = np.array([[q.A, 0.5 * q.B], [0.5 * q.B, q.C]])
    center = np.linalg.solve(2.0 * Q, [-q.D, -q.E])
    # value of the conic at the center
    f0 = q.F + 0.5 * (q.D * center[0] + q.E * center[1])
    lam, vec = np.linalg.eigh(Q)
    sq = -f0 / lam
    if np.any(sq <= 0):
        raise GeometryError("conic has no real points (imaginary ellipse)")
    # major axis <-> smaller |lambda| <-> larger squared semi-axis
    i_major = int(np.argmax(sq))
    a = math.sqrt(sq[i_major])
    b = math.sqrt(sq[1 - i_major])
    if a - b <= CIRCLE_TOL * a:
        return CanonicalEllipse(center, a, min(a, b), 0.0)
    v = vec[:, i_major]
    return CanonicalEllipse(center, a, b, fold_angle(math.atan2(v[1], v[0])))


def cos_zeta(z, c1, c2) -> float:
    """Cosine of the angle subtended at ``z`` by the two foci.

    Raises
    ------
    FocusCoincidenceError
        If ``z`` sits on either focus.
    """
    z = np.asarray(z, dtype=float)
    u = np.asarray(c1, dtype=float) - z
    v = np.asarray(c2, dtype=float) - z
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < COINCIDENCE_TOL or nv < COINCIDENCE_TOL:
        raise FocusCoincidenceError(f"point {z} coincides with a focus")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def cos_zetas(points, c1, c2) -> np.ndarray:
    """Vectorized :func:`cos_zeta` over an ``(n, d)`` array of points."""
    pts = np.asarray(points, dtype=float)
    u = np.asarray(c1, dtype=float) - pts
    v = np.asarray(c2, dtype=float) - pts
    nu = np.linalg.norm(u, axis=1)
    nv = np.linalg.norm(v, axis=1)
    if np.any(nu < COINCIDENCE_TOL) or np.any(nv < COINCIDENCE_TOL):
        raise FocusCoincidenceError("a data point coincides with a focus")
    return np.clip(np.einsum("ij,ij->i", u, v) / (nu * nv), -1.0, 1.0)
