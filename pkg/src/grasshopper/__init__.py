"""Antipodal sphere-colouring search for the fixed-angle grasshopper jump."""

from .colouring import (
    Colouring,
    binarize,
    init_from_colouring,
    init_hemisphere,
    init_random,
    init_random_fractional,
)
from .errors import (
    ConfigError,
    DomainError,
    FileFormatError,
    GrasshopperError,
    PreconditionError,
    ShapeError,
)
from .grid import (
    Resolution,
    SphereGrid,
    build_grid,
    central_angle,
    central_angles,
    hemisphere_split,
    num_points,
    resolution_h,
)
from .kernel import KernelIndex, build_index, kernel_phi
from .objective import (
    ObjectiveState,
    all_flip_deltas,
    apply_flip,
    bell_correlation,
    flip_delta,
    hemisphere_reference,
    make_state,
    point_probability,
    total_probability,
)
from .solvers import (
    AnnealSchedule,
    RunRecord,
    default_schedule,
    greedy,
    multi_start,
    simulated_annealing,
    slow_schedule,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule",
    "Colouring",
    "ConfigError",
    "DomainError",
    "FileFormatError",
    "GrasshopperError",
    "KernelIndex",
    "ObjectiveState",
    "PreconditionError",
    "Resolution",
    "RunRecord",
    "ShapeError",
    "SphereGrid",
    "all_flip_deltas",
    "apply_flip",
    "bell_correlation",
    "binarize",
    "build_grid",
    "build_index",
    "central_angle",
    "central_angles",
    "default_schedule",
    "flip_delta",
    "greedy",
    "hemisphere_reference",
    "hemisphere_split",
    "init_from_colouring",
    "init_hemisphere",
    "init_random",
    "init_random_fractional",
    "kernel_phi",
    "make_state",
    "multi_start",
    "num_points",
    "point_probability",
    "resolution_h",
    "simulated_annealing",
    "slow_schedule",
    "total_probability",
]
