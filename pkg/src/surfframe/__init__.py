"""Fourier frames and Bessel bounds for surface measures.

Constructs explicit frame spectra for polytope boundaries, estimates frame
bounds for any (measure, spectrum) pair, quantifies the obstruction on
curved surfaces and builds group-averaged eigenbases on the sphere.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigInvalid,
    HypothesisViolation,
    InvalidInput,
    NumericalError,
    SurfFrameError,
)
from .frame_core import FrameReport, Spectrum, certified_bessel_constant, frame_bounds  # noqa: E402
from .geometry import ConvexBody, Facet, classify_facets, dual_norm, minkowski_functional  # noqa: E402
from .measure import QuadratureMeasure, fourier_transform, polytope_quadrature, sphere_quadrature  # noqa: E402
from .polytope_frame import build_frame_spectrum, lower_bound_certificate  # noqa: E402

__all__ = [
    "__version__",
    "ConfigInvalid",
    "ConvexBody",
    "Facet",
    "FrameReport",
    "HypothesisViolation",
    "InvalidInput",
    "NumericalError",
    "QuadratureMeasure",
    "Spectrum",
    "SurfFrameError",
    "build_frame_spectrum",
    "certified_bessel_constant",
    "classify_facets",
    "dual_norm",
    "fourier_transform",
    "frame_bounds",
    "lower_bound_certificate",
    "minkowski_functional",
    "polytope_quadrature",
    "sphere_quadrature",
]
