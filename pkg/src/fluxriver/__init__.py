"""Layered time-series views of ensemble classifier predictions.

Per-step vote totals drive river layouts, including the dual-flux
ThemeRiver, alongside per-model pixel maps; everything renders to
byte-stable SVG.
"""

__version__ = "0.1.0"

from .aggregate import (
    aggregate_votes,
    class_accuracy,
    ensemble_decision,
    ensemble_decisions,
    expand_windows,
    unit_section_length,
    weight_table,
)
from .core import (
    DEFAULT_MOODS,
    Bundle,
    ModelMeta,
    Mood,
    MoodSet,
    PredictionMatrix,
    VoteSeries,
    WeightingScheme,
    default_mood_set,
)
from .layout import assign_order, assign_positions, layout_dualflux, layout_stacked, layout_themeriver
from .pixelmap import SortScheme, build_panel, sort_rows
from .render import Canvas, Placement, compose_figure, render_legend, render_pixels, render_river

__all__ = [
    "Bundle",
    "Canvas",
    "DEFAULT_MOODS",
    "ModelMeta",
    "Mood",
    "MoodSet",
    "Placement",
    "PredictionMatrix",
    "SortScheme",
    "VoteSeries",
    "WeightingScheme",
    "aggregate_votes",
    "assign_order",
    "assign_positions",
    "build_panel",
    "class_accuracy",
    "compose_figure",
    "default_mood_set",
    "ensemble_decision",
    "ensemble_decisions",
    "expand_windows",
    "layout_dualflux",
    "layout_stacked",
    "layout_themeriver",
    "render_legend",
    "render_pixels",
    "render_river",
    "sort_rows",
    "unit_section_length",
    "weight_table",
]
