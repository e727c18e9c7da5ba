"""Foci-parameterized robust ellipse and spheroid fitting."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    CanonicalEllipse,
    CanonicalSpheroid,
    ConicCoefficients,
    FocusCoincidenceError,
    FociEllipse,
    FociSpheroid,
    GeometryError,
    canonical_to_conic,
    canonical_to_foci,
    canonical_to_spheroid,
    conic_to_canonical,
    cos_zeta,
    foci_to_canonical,
    spheroid_to_canonical,
)
from .fitters import (  # noqa: E402
    DegenerateDataError,
    FitReport,
    fit_axial_guided,
    fit_penalized,
    fit_raw,
    fit_spheroid_penalized,
    fit_spheroid_raw,
    fit_spheroid_weighted,
    fit_weighted,
    initialize,
)
from .baseline import FitFailureError, fit_algebraic  # noqa: E402
from .metrics import axis_direction_error, error_rate  # noqa: E402

__all__ = [
    "CanonicalEllipse", "CanonicalSpheroid", "ConicCoefficients", "FocusCoincidenceError",
    "FociEllipse", "FociSpheroid", "GeometryError", "canonical_to_conic", "canonical_to_foci",
    "canonical_to_spheroid", "conic_to_canonical", "cos_zeta", "foci_to_canonical",
    "spheroid_to_canonical", "DegenerateDataError", "FitReport", "fit_axial_guided",
    "fit_penalized", "fit_raw", "fit_spheroid_penalized", "fit_spheroid_raw",
    "fit_spheroid_weighted", "fit_weighted", "initialize", "FitFailureError", "fit_algebraic",
    "axis_direction_error", "error_rate",
]
