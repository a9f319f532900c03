"""Ready-made figure arrangements: rivers on their own, or rivers over pixel maps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .aggregate import aggregate_votes, weight_table
from .core import Bundle, WeightingScheme
from .layout import RiverGeometry, layout
from .pixelmap import SortScheme, build_panel
from .render import Canvas, Placement, SvgDoc, compose_figure, render_legend, render_pixels, render_river

# CLI spelling -> SortScheme.kind
SORT_FLAGS = {
    "accuracy": "accuracy_desc",
    "method-interval": "method_then_interval",
    "interval-accuracy": "interval_then_accuracy",
}


@dataclass(frozen=True)
class FigureSize:
    width: float = 600.0
    river_height: float = 160.0
    pixel_height: float | None = None
    gap: float = 12.0
    bar_width: float = 8.0

    def pixels_for(self, m: int) -> float:
        if self.pixel_height is not None:
            return self.pixel_height
        return float(min(max(4 * m, 120), 640)) + 20


def river_geometry(bundle: Bundle, design: str, scheme: WeightingScheme, smoothing: str = "smooth") -> RiverGeometry:
    vs = aggregate_votes(bundle.predictions, bundle.meta, scheme)
    return layout(vs, design, smoothing)


def river_figure(
    bundle: Bundle,
    design: str,
    scheme: WeightingScheme,
    smoothing: str = "smooth",
    size: FigureSize = FigureSize(),
    margins: tuple[float, float, float, float] = (10.0, 10.0, 10.0, 10.0),
) -> SvgDoc:
    geometry = river_geometry(bundle, design, scheme, smoothing)
    canvas = Canvas.for_river(geometry, size.width, size.river_height, margins)
    return render_river(geometry, canvas, bundle.mood_set)


def pixel_figure(
    bundle: Bundle,
    sort: str = "accuracy_desc",
    powers: Sequence[int] = (),
    with_river: bool = False,
    river_scheme: WeightingScheme | None = None,
    basis: str = "precision",
    smoothing: str = "smooth",
    size: FigureSize = FigureSize(),
) -> SvgDoc:
    """Pixel maps, optionally with the dual-flux river above each aligned grid.

    * no powers: the prediction grid alone.
    * one power p: prediction grid, class-accuracy grid (alpha^p) and an
      overall-accuracy bar on the right.
    * several powers: the prediction grid, then one column per power with the
      accuracy bar on the left of an alpha^p grid under the river weighted by
      alpha^p.

    The river over the prediction grid uses ``river_scheme``, defaulting to
    votes weighted by squared class-accuracy.
    """
    pm = bundle.predictions
    ordered_meta = bundle.ordered_meta()
    scheme = SortScheme(sort)
    river_scheme = river_scheme or WeightingScheme("class_accuracy", 2, basis=basis)
    table = weight_table(ordered_meta, basis)
    pix_h = size.pixels_for(pm.m)
    river_h = size.river_height if with_river else 0.0
    top = river_h + (size.gap if with_river else 0.0)
    parts: list[tuple[SvgDoc, Placement]] = []
    ramps: list[str] = []

    def river_part(col_scheme: WeightingScheme, margins, x: float, group: str) -> None:
        geometry = river_geometry(bundle, "dualflux", col_scheme, smoothing)
        canvas = Canvas.for_river(geometry, size.width, size.river_height, margins)
        parts.append((render_river(geometry, canvas, bundle.mood_set), Placement(x, 0.0, group)))

    if len(powers) <= 1:
        margins = (10.0, 10.0, 10.0, 10.0)
        p = powers[0] if powers else 1
        panel = build_panel(pm, ordered_meta, scheme, table if powers else None, power=p)
        canvas = Canvas.for_pixels(panel, size.width, pix_h, margins)
        doc = render_pixels(
            panel,
            canvas,
            bundle.mood_set,
            side_bar="right" if powers else None,
            gap=size.gap,
            bar_width=size.bar_width,
        )
        if with_river:
            river_part(river_scheme, margins, 0.0, "col0")
        parts.append((doc, Placement(0.0, top, "col0")))
        if powers:
            ramps = [f"class-accuracy^{p}" if p > 1 else "class-accuracy", "model accuracy"]
    else:
        left = 10.0 + size.gap + size.bar_width
        margins = (10.0, 10.0, 10.0, left)
        x = 0.0
        base = build_panel(pm, ordered_meta, scheme)
        canvas = Canvas.for_pixels(base, size.width, pix_h, margins)
        if with_river:
            river_part(river_scheme, margins, x, "col0")
        parts.append((render_pixels(base, canvas, bundle.mood_set, side_bar=None), Placement(x, top, "col0")))
        for i, p in enumerate(powers, start=1):
            x += size.width + size.gap
            panel = build_panel(pm, ordered_meta, scheme, table, power=p)
            doc = render_pixels(
                panel,
                canvas,
                bundle.mood_set,
                grid="weights",
                side_bar="left",
                gap=size.gap,
                bar_width=size.bar_width,
            )
            if with_river:
                river_part(WeightingScheme("class_accuracy", p, basis=basis), margins, x, f"col{i}")
            parts.append((doc, Placement(x, top, f"col{i}")))
        ramps = ["class-accuracy^p", "model accuracy^p"]

    legend = render_legend(bundle.mood_set, ramps)
    bottom = max(place.y + doc.height for doc, place in parts)
    parts.append((legend, Placement(0.0, bottom + size.gap)))
    return compose_figure(parts)


# The ten-panel design comparison: letter -> (design, weighting, normalized, smoothing).
# a-d unweighted, e-g weighted by squared class-accuracy, h-j the same normalized.
RIVER_VARIANTS = {
    "a": ("stacked", "none", False, "smooth"),
    "b": ("themeriver", "none", False, "smooth"),
    "c": ("dualflux", "none", False, "blocky"),
    "d": ("dualflux", "none", False, "smooth"),
    "e": ("stacked", "alpha2", False, "smooth"),
    "f": ("themeriver", "alpha2", False, "smooth"),
    "g": ("dualflux", "alpha2", False, "smooth"),
    "h": ("stacked", "alpha2", True, "smooth"),
    "i": ("themeriver", "alpha2", True, "smooth"),
    "j": ("dualflux", "alpha2", True, "smooth"),
}
