"""Deterministic SVG emission.

Every renderer returns an :class:`SvgDoc`; its text is a pure function of the
inputs (fixed attribute order and number formatting, nothing time-dependent), so
identical inputs give byte-identical documents.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence
from xml.sax.saxutils import escape, quoteattr

from .core import DEFAULT_MOODS, MoodSet
from .errors import DimensionMismatch, EmptyGeometry, InvariantViolation, ScaleMismatch
from .layout import RiverGeometry
from .pixelmap import PixelPanel

ALIGN_TOL = 1e-9


def fmt(v: float, dp: int = 3) -> str:
    """Fixed-point text with at most ``dp`` decimals and no trailing zeros."""
    s = f"{v:.{dp}f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def grayscale(v: float) -> str:
    """0 -> white, 1 -> black."""
    level = round(255 * (1.0 - min(max(float(v), 0.0), 1.0)))
    return f"#{level:02X}{level:02X}{level:02X}"


@dataclass(frozen=True)
class Canvas:
    """Pixel frame plus the affine maps from data to pixel coordinates.

    ``margins`` is (top, right, bottom, left).  y is flipped so larger data
    values sit higher on the page.
    """

    width: float
    height: float
    x_domain: tuple[float, float]
    y_domain: tuple[float, float]
    margins: tuple[float, float, float, float] = (10.0, 10.0, 10.0, 10.0)
    decimal_places: int = 3

    def __post_init__(self) -> None:
        top, right, bottom, left = self.margins
        if self.width - left - right <= 0 or self.height - top - bottom <= 0:
            raise InvariantViolation("canvas margins leave no plot area")
        if self.x_domain[1] <= self.x_domain[0] or self.y_domain[1] <= self.y_domain[0]:
            raise InvariantViolation("canvas domains must have positive extent")

    @property
    def x_scale(self) -> tuple[float, float]:
        """(a, b) with pixel_x = a * x + b."""
        _, right, _, left = self.margins
        x0, x1 = self.x_domain
        a = (self.width - left - right) / (x1 - x0)
        return a, left - a * x0

    @property
    def y_scale(self) -> tuple[float, float]:
        top, _, bottom, _ = self.margins
        y0, y1 = self.y_domain
        a = -(self.height - top - bottom) / (y1 - y0)
        return a, top - a * y1

    def px(self, x: float) -> float:
        a, b = self.x_scale
        return round(a * x + b, self.decimal_places)

    def py(self, y: float) -> float:
        a, b = self.y_scale
        return round(a * y + b, self.decimal_places)

    @classmethod
    def for_river(
        cls,
        geometry: RiverGeometry,
        width: float = 600.0,
        height: float = 240.0,
        margins: tuple[float, float, float, float] = (10.0, 10.0, 10.0, 10.0),
        y_domain: tuple[float, float] | None = None,
    ) -> Canvas:
        if y_domain is None:
            lo, hi = geometry.y_bounds()
            if hi - lo <= 0:
                lo, hi = lo - 0.5, hi + 0.5
            y_domain = (lo, hi)
        return cls(width, height, geometry.x_domain, y_domain, margins)

    @classmethod
    def for_pixels(
        cls,
        panel: PixelPanel,
        width: float = 600.0,
        height: float = 420.0,
        margins: tuple[float, float, float, float] = (10.0, 10.0, 10.0, 10.0),
    ) -> Canvas:
        m, n = panel.shape
        return cls(width, height, (0.5, n + 0.5), (0.0, float(m)), margins)


@dataclass(frozen=True)
class SvgDoc:
    """An SVG document held as its inner markup plus frame size.

    ``x_map`` is the (a, b) pixel map of the data x axis, for documents whose
    columns can be aligned with other documents.
    """

    width: float
    height: float
    body: str
    x_map: tuple[float, float] | None = None
    decimal_places: int = 3

    @property
    def text(self) -> str:
        w, h = fmt(self.width, self.decimal_places), fmt(self.height, self.decimal_places)
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
            f"{self.body}"
            "</svg>\n"
        )

    def __str__(self) -> str:
        return self.text

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.text)


def _path_d(points: Sequence[tuple[float, float]], canvas: Canvas, close: bool) -> str:
    dp = canvas.decimal_places
    cmds = [
        f"{'M' if i == 0 else 'L'}{fmt(canvas.px(x), dp)},{fmt(canvas.py(y), dp)}" for i, (x, y) in enumerate(points)
    ]
    return " ".join(cmds) + (" Z" if close else "")


def render_river(
    geometry: RiverGeometry,
    canvas: Canvas,
    moods: MoodSet = DEFAULT_MOODS,
    title: str | None = None,
) -> SvgDoc:
    """One filled path per polygon, in geometry order; threshold lines dashed."""
    if not geometry.polygons:
        raise EmptyGeometry("river geometry has no polygons")
    lines = [f'<g class="river" data-design="{geometry.design}">\n']
    if title:
        lines.append(f"<title>{escape(title)}</title>\n")
    for poly in geometry.polygons:
        mood = moods[poly.mood]
        lines.append(
            f'<path d="{_path_d(poly.points, canvas, True)}" fill="{mood.color}" '
            f"data-mood={quoteattr(mood.label)}/>\n"
        )
    for line in geometry.gridlines:
        lines.append(
            f'<path class="threshold" d="{_path_d(line, canvas, False)}" fill="none" '
            'stroke="#444444" stroke-width="1" stroke-dasharray="4 3"/>\n'
        )
    lines.append("</g>\n")
    return SvgDoc(canvas.width, canvas.height, "".join(lines), canvas.x_scale, canvas.decimal_places)


def _grid_rects(
    colors: Sequence[Sequence[str]],
    x_edges: Sequence[float],
    y_edges: Sequence[float],
    dp: int,
) -> list[str]:
    out = []
    widths = [fmt(round(b - a, dp), dp) for a, b in zip(x_edges, x_edges[1:])]
    xs = [fmt(x, dp) for x in x_edges]
    for r, row in enumerate(colors):
        y = fmt(y_edges[r], dp)
        h = fmt(round(y_edges[r + 1] - y_edges[r], dp), dp)
        for j, color in enumerate(row):
            out.append(f'<rect x="{xs[j]}" y="{y}" width="{widths[j]}" height="{h}" fill="{color}"/>\n')
    return out


def render_pixels(
    panel: PixelPanel,
    canvas: Canvas,
    palette: MoodSet = DEFAULT_MOODS,
    *,
    ramp: Callable[[float], str] = grayscale,
    grid: str = "predictions",
    show_weights: bool = True,
    side_bar: str | None = "right",
    gap: float = 6.0,
    bar_width: float = 8.0,
) -> SvgDoc:
    """Pixel map of a panel.

    The primary grid (predictions, or weights when ``grid="weights"``) fills
    the canvas plot area so its columns line up with a river drawn on an
    equally-framed canvas.  With ``grid="predictions"`` the weight grid, if
    any, is appended to the right.  The side bar goes right of everything or
    into the left margin.
    """
    m, n = panel.shape
    if canvas.x_domain != (0.5, n + 0.5) or canvas.y_domain != (0.0, float(m)):
        raise DimensionMismatch(f"canvas domains do not match a {m}x{n} panel")
    if grid not in ("predictions", "weights"):
        raise InvariantViolation(f"unknown grid {grid!r}")
    if grid == "weights" and panel.weight_grid is None:
        raise DimensionMismatch("panel has no weight grid")
    dp = canvas.decimal_places
    x_edges = [canvas.px(j + 0.5) for j in range(n + 1)]
    y_edges = [canvas.py(m - r) for r in range(m + 1)]
    plot_w = x_edges[-1] - x_edges[0]

    if grid == "predictions":
        colors = [[palette[int(c)].color for c in row] for row in panel.prediction_grid]
    else:
        colors = [[ramp(v) for v in row] for row in panel.weight_grid]
    body = ['<g class="pixels" shape-rendering="crispEdges">\n', f'<g class="{grid}">\n']
    body += _grid_rects(colors, x_edges, y_edges, dp)
    body.append("</g>\n")

    extra = 0.0
    right_edge = x_edges[-1]
    if grid == "predictions" and show_weights and panel.weight_grid is not None:
        dx = round(plot_w + gap, dp)
        shifted = [round(x + dx, dp) for x in x_edges]
        body.append('<g class="weights">\n')
        body += _grid_rects([[ramp(v) for v in row] for row in panel.weight_grid], shifted, y_edges, dp)
        body.append("</g>\n")
        extra += dx
        right_edge = shifted[-1]

    if side_bar is not None:
        bar_colors = [[ramp(v)] for v in panel.side_bar]
        if side_bar == "right":
            x0 = round(right_edge + gap, dp)
            extra += gap + bar_width
        elif side_bar == "left":
            x0 = round(x_edges[0] - gap - bar_width, dp)
            if x0 < 0:
                raise InvariantViolation("left margin too narrow for the side bar")
        else:
            raise InvariantViolation(f"unknown side-bar position {side_bar!r}")
        body.append('<g class="side-bar">\n')
        body += _grid_rects(bar_colors, [x0, round(x0 + bar_width, dp)], y_edges, dp)
        body.append("</g>\n")

    body.append("</g>\n")
    return SvgDoc(round(canvas.width + extra, dp), canvas.height, "".join(body), canvas.x_scale, dp)


@dataclass(frozen=True)
class Placement:
    """Offset of a part inside a composite.

    Parts sharing an ``align_group`` must map data x to the same composite
    pixel x.
    """

    x: float = 0.0
    y: float = 0.0
    align_group: str | None = None


def composite_x_map(doc: SvgDoc, place: Placement) -> tuple[float, float]:
    if doc.x_map is None:
        raise ScaleMismatch("part has no x scale to align")
    a, b = doc.x_map
    return a, b + place.x


def compose_figure(parts: Sequence[tuple[SvgDoc, Placement]], decimal_places: int = 3) -> SvgDoc:
    """Place documents into one, each inside its own translated group."""
    if not parts:
        raise InvariantViolation("nothing to compose")
    groups: dict[str, tuple[float, float]] = {}
    for doc, place in parts:
        if place.align_group is None:
            continue
        a, b = composite_x_map(doc, place)
        ref = groups.setdefault(place.align_group, (a, b))
        if abs(ref[0] - a) > ALIGN_TOL or abs(ref[1] - b) > ALIGN_TOL:
            raise ScaleMismatch(
                f"parts in align group {place.align_group!r} map x differently: {ref} vs {(a, b)}"
            )
    dp = decimal_places
    body = []
    for doc, place in parts:
        attrs = f' transform="translate({fmt(place.x, dp)},{fmt(place.y, dp)})"'
        if place.align_group is not None:
            attrs += f" data-align={quoteattr(place.align_group)}"
        body.append(f"<g{attrs}>\n{doc.body}</g>\n")
    width = max(place.x + doc.width for doc, place in parts)
    height = max(place.y + doc.height for doc, place in parts)
    x_map = next(iter(groups.values())) if len(groups) == 1 else None
    return SvgDoc(round(width, dp), round(height, dp), "".join(body), x_map, dp)


def render_legend(
    mood_set: MoodSet,
    extra_ramps: Sequence[str] = (),
    *,
    ramp: Callable[[float], str] = grayscale,
    swatch: float = 12.0,
    spacing: float = 90.0,
    ramp_steps: int = 10,
) -> SvgDoc:
    """A row of mood swatches, then one labelled ramp bar per entry in ``extra_ramps``."""
    body = ['<g class="legend" font-family="sans-serif" font-size="11">\n']
    for i, mood in enumerate(mood_set):
        x = 4 + i * spacing
        body.append(
            f'<rect x="{fmt(x)}" y="4" width="{fmt(swatch)}" height="{fmt(swatch)}" fill="{mood.color}" '
            f"data-mood={quoteattr(mood.label)}/>\n"
        )
        body.append(f'<text x="{fmt(x + swatch + 4)}" y="{fmt(4 + swatch - 2)}">{escape(mood.label)}</text>\n')
    width = 8 + len(mood_set) * spacing
    y = 4 + swatch + 8
    step_w = 12.0
    for label in extra_ramps:
        body.append(f'<g class="ramp" data-label={quoteattr(label)}>\n')
        for s in range(ramp_steps + 1):
            v = s / ramp_steps
            body.append(
                f'<rect x="{fmt(4 + s * step_w)}" y="{fmt(y)}" width="{fmt(step_w)}" height="{fmt(swatch)}" '
                f'fill="{ramp(v)}"/>\n'
            )
        tx = 4 + (ramp_steps + 1) * step_w + 6
        body.append(f'<text x="{fmt(tx)}" y="{fmt(y + swatch - 2)}">{escape(label)} (0 to 1)</text>\n')
        body.append("</g>\n")
        width = max(width, tx + 8 * (len(label) + 9))
        y += swatch + 8
    body.append("</g>\n")
    return SvgDoc(round(width, 3), round(y + 4, 3), "".join(body))
