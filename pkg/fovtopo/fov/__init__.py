from .fitting import (
    DEFAULT_GRID_RES,
    ApproximationQuality,
    approximation_quality,
    fit_approximation,
    quality_grid,
)
from .sector import (
    VIRTUAL_POINTS,
    FovApproximation,
    FovSector,
    approx_contains,
    approx_mask,
    default_approximation,
    place_virtual_points,
    rotation_matrix,
    sector_contains,
    sector_mask,
    wrap_angle,
)
from .sensing import (
    COINCIDENT_DISTANCE,
    RobotSpec,
    SensingGraph,
    bearing_deviation,
    check_separation,
    select_sector,
    sensing_graph,
)

__all__ = [
    "COINCIDENT_DISTANCE",
    "DEFAULT_GRID_RES",
    "VIRTUAL_POINTS",
    "ApproximationQuality",
    "FovApproximation",
    "FovSector",
    "RobotSpec",
    "SensingGraph",
    "approx_contains",
    "approx_mask",
    "approximation_quality",
    "bearing_deviation",
    "check_separation",
    "default_approximation",
    "fit_approximation",
    "place_virtual_points",
    "quality_grid",
    "rotation_matrix",
    "sector_contains",
    "sector_mask",
    "select_sector",
    "sensing_graph",
    "wrap_angle",
]
