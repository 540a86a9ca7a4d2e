"""Rendering for dmafocus grid CSVs and solver reports."""

from .cli import grid_stats, load_grid, main, render_heatmap, render_trace

__version__ = "0.1.0"
