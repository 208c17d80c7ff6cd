"""Rendering for sphere-colouring CSV exports: point maps and P(theta) curves."""

from .data import (
    MapDataset,
    PlotDataError,
    count_boundary_lobes,
    read_map_csv,
    read_results_csv,
    rotate_coloured_to_north,
)
from .render import (
    build_curve_figure,
    build_map_figure,
    render_map,
    render_success_curve,
)

__version__ = "0.1.0"

__all__ = [
    "MapDataset",
    "PlotDataError",
    "build_curve_figure",
    "build_map_figure",
    "count_boundary_lobes",
    "read_map_csv",
    "read_results_csv",
    "render_map",
    "render_success_curve",
    "rotate_coloured_to_north",
]
