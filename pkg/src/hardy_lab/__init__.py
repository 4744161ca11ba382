"""Numerical laboratory for curvature-improved Hardy inequalities."""

from .conformal import frak_F, invariance_check, pullback_verify
from .config import RunConfig
from .domains import (
    Annulus,
    ConformalAnnulus,
    Cylinder,
    Disc,
    DomainSpec,
    Ellipse,
    ExteriorDisc,
    Hyperboloid,
    Torus,
)
from .errors import HardyLabError
from .geometry import distance, geometry_check, laplacian_distance
from .inequalities import InequalitySpec, weight
from .profiles import Band, PowerBump, RadialCustom, SmoothBump
from .quadrature import QuadratureSpec
from .server import HardyLabServer, is_debug_mode
from .telemetry import (
    TelemetryConfig,
    TraceContextFormatter,
    get_telemetry_config,
    get_tracer,
    lab_span,
    traced_span,
)
from .verifier import HardyReport, estimate_constant, verify

__all__ = [
    "Annulus",
    "Band",
    "ConformalAnnulus",
    "Cylinder",
    "Disc",
    "DomainSpec",
    "Ellipse",
    "ExteriorDisc",
    "HardyLabError",
    "HardyLabServer",
    "HardyReport",
    "Hyperboloid",
    "InequalitySpec",
    "PowerBump",
    "QuadratureSpec",
    "RadialCustom",
    "RunConfig",
    "SmoothBump",
    "TelemetryConfig",
    "TraceContextFormatter",
    "Torus",
    "distance",
    "estimate_constant",
    "frak_F",
    "geometry_check",
    "get_telemetry_config",
    "get_tracer",
    "invariance_check",
    "is_debug_mode",
    "lab_span",
    "laplacian_distance",
    "pullback_verify",
    "traced_span",
    "verify",
    "weight",
]
