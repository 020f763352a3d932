"""Python access to the cutform core library."""

from ._core import (
    AssumptionViolation,
    Error,
    InvalidArgument,
    Mesh,
    NumericalFailure,
    ad_gradient,
    count_volumes,
    evaluate,
    evolve,
    fd_gradient,
    geometry_names,
    interpolate,
    isolated_indicator,
    optimize_cantilever,
    optimize_volume,
    phase_areas,
    reinitialize,
    run_cli,
    structured_mesh,
)

__all__ = [
    "AssumptionViolation",
    "Error",
    "InvalidArgument",
    "Mesh",
    "NumericalFailure",
    "ad_gradient",
    "count_volumes",
    "evaluate",
    "evolve",
    "fd_gradient",
    "geometry_names",
    "interpolate",
    "isolated_indicator",
    "optimize_cantilever",
    "optimize_volume",
    "phase_areas",
    "reinitialize",
    "run_cli",
    "structured_mesh",
]
