"""Figure rendering for simulator trajectory CSVs."""

from .errors import EmptyInput, SchemaMismatch
from .render import (PANELS, REQUIRED_HEADER, PlotSpec, RenderResult,
                     draw_panel, load_trajectories, render, render_files)

__all__ = [
    "EmptyInput",
    "PANELS",
    "PlotSpec",
    "REQUIRED_HEADER",
    "RenderResult",
    "SchemaMismatch",
    "draw_panel",
    "load_trajectories",
    "render",
    "render_files",
]
