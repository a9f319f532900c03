import re
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from fluxriver.aggregate import aggregate_votes, weight_table
from fluxriver.core import DEFAULT_MOODS, ModelMeta, MoodSet, PredictionMatrix, VoteSeries, WeightingScheme
from fluxriver.errors import DimensionMismatch, EmptyGeometry, ScaleMismatch
from fluxriver.figures import pixel_figure
from fluxriver.layout import RiverGeometry, layout, layout_stacked
from fluxriver.pixelmap import SortScheme, build_panel
from fluxriver.render import (
    Canvas,
    Placement,
    SvgDoc,
    compose_figure,
    fmt,
    grayscale,
    render_legend,
    render_pixels,
    render_river,
)

from .goldens import GOLDEN, ORDER_SWITCH, order_switch_text

SVG = "{http://www.w3.org/2000/svg}"
NUMBER = re.compile(r"-?\d+(?:\.(\d+))?")


def parse_text(text: str) -> ET.Element:
    return ET.fromstring(text.encode("utf-8"))


def parse(doc: SvgDoc) -> ET.Element:
    return parse_text(doc.text)


def path_coords(d: str) -> list[tuple[float, float]]:
    return [tuple(map(float, pair.split(","))) for pair in re.findall(r"[ML](-?[\d.]+,-?[\d.]+)", d)]


def all_coordinates(root: ET.Element):
    for el in root.iter():
        if el.tag == SVG + "path":
            yield from path_coords(el.get("d"))
        elif el.tag == SVG + "rect":
            x, y, w, h = (float(el.get(a)) for a in ("x", "y", "width", "height"))
            yield (x, y)
            yield (x + w, y + h)


def series(columns, moods=DEFAULT_MOODS):
    v = np.array(columns, dtype=float).T
    return VoteSeries(v, v.sum(axis=0), None, moods)


# --- helpers -------------------------------------------------------------------------------


def test_fmt():
    assert fmt(1.0) == "1"
    assert fmt(1.23456) == "1.235"
    assert fmt(-0.0001) == "0"
    assert fmt(2.5, 0) == "2"
    assert fmt(12.3400) == "12.34"


def test_grayscale_endpoints():
    assert grayscale(0) == "#FFFFFF"
    assert grayscale(1) == "#000000"
    assert grayscale(2) == "#000000"


def test_canvas_maps_are_affine_and_flipped():
    c = Canvas(200, 100, (0.5, 4.5), (-1, 1), margins=(10, 10, 10, 10))
    assert (c.px(0.5), c.px(4.5)) == (10, 190)
    assert (c.py(1), c.py(-1)) == (10, 90)
    a, b = c.x_scale
    assert a * 2.5 + b == c.px(2.5)


# --- river -----------------------------------------------------------------------------------


def test_single_constant_stream_is_one_rectangle():
    moods = MoodSet.from_labels(["x", "y"])
    g = layout_stacked(series([[3, 0], [3, 0], [3, 0]], moods))
    only = RiverGeometry(g.design, g.by_mood(0), (), g.x_domain)
    doc = render_river(only, Canvas.for_river(only, 100, 50), moods)
    paths = parse(doc).findall(f".//{SVG}path")
    assert len(paths) == 1
    # the band keeps a vertex at each step centre; all of them sit on the rectangle edges
    pts = path_coords(paths[0].get("d"))
    assert {y for _, y in pts} == {10, 40}
    assert (min(x for x, _ in pts), max(x for x, _ in pts)) == (10, 90)
    assert {(10, 10), (90, 10), (90, 40), (10, 40)} <= set(pts)


def test_empty_geometry():
    with pytest.raises(EmptyGeometry):
        render_river(RiverGeometry("stacked", (), (), (0.5, 1.5)), Canvas(10, 10, (0.5, 1.5), (0, 1), (1, 1, 1, 1)))


def test_river_one_path_per_polygon_and_dashed_thresholds():
    vs = series([[1, 4, 0, 2], [0, 2, 1, 5], [3, 3, 1, 1]])
    g = layout(vs, "dualflux", "smooth")
    doc = render_river(g, Canvas.for_river(g))
    root = parse(doc)
    fills = [p for p in root.iter(SVG + "path") if p.get("class") != "threshold"]
    lines = [p for p in root.iter(SVG + "path") if p.get("class") == "threshold"]
    assert len(fills) == len(g.polygons)
    assert [p.get("data-mood") for p in fills] == [DEFAULT_MOODS[p.mood].label for p in g.polygons]
    assert len(lines) == 2 and all(p.get("stroke-dasharray") for p in lines)
    assert doc.text == render_river(g, Canvas.for_river(g)).text


def test_order_switch_golden():
    assert order_switch_text() == (GOLDEN / ORDER_SWITCH).read_text(encoding="utf-8")


@pytest.mark.parametrize("design", ["stacked", "themeriver", "dualflux"])
def test_coordinates_within_viewbox_and_rounded(design, appassionata):
    vs = aggregate_votes(appassionata.predictions, appassionata.meta, WeightingScheme.from_flag("alpha2"))
    g = layout(vs, design)
    doc = render_river(g, Canvas.for_river(g, 600, 160))
    root = parse(doc)
    _, _, w, h = map(float, root.get("viewBox").split())
    for x, y in all_coordinates(root):
        assert 0 <= x <= w and 0 <= y <= h
    for frac in NUMBER.findall(doc.body):
        assert len(frac) <= 3


# --- pixels ----------------------------------------------------------------------------------


def test_one_by_one_panel():
    pm = PredictionMatrix(("a",), np.array([[2]]))
    meta = [ModelMeta("a", "DT", 1, 0.5, tuple(tuple(int(i == j) for j in range(4)) for i in range(4)))]
    panel = build_panel(pm, meta, SortScheme())
    doc = render_pixels(panel, Canvas.for_pixels(panel, 50, 50), side_bar=None)
    rects = parse(doc).findall(f".//{SVG}rect")
    assert len(rects) == 1
    assert rects[0].get("fill") == DEFAULT_MOODS[2].color


def _panel(bundle, power=1, weights=True):
    meta = bundle.ordered_meta()
    table = weight_table(meta, "precision") if weights else None
    return build_panel(bundle.predictions, meta, SortScheme(), table, power=power)


def test_rows_share_edges(appassionata):
    panel = _panel(appassionata)
    doc = render_pixels(panel, Canvas.for_pixels(panel, 600, 420, (10, 10, 10, 10)))
    preds = [r for r in parse(doc).iter(SVG + "rect")][: 210 * 30]
    rows = [preds[i * 30 : (i + 1) * 30] for i in range(210)]
    for upper, lower in zip(rows, rows[1:]):
        assert float(upper[0].get("y")) + float(upper[0].get("height")) == pytest.approx(float(lower[0].get("y")), abs=1e-9)
    for row in rows[:3]:
        for a, b in zip(row, row[1:]):
            assert float(a.get("x")) + float(a.get("width")) == pytest.approx(float(b.get("x")), abs=1e-9)


def test_rect_edges_are_exact_text_matches():
    # with integer pitch the shared edges are identical numbers, not just close ones
    pm = PredictionMatrix(("a", "b", "c"), np.array([[0, 1], [2, 3], [1, 1]]))
    meta = [ModelMeta(mid, "DT", 1, 0.5, tuple(tuple(int(i == j) for j in range(4)) for i in range(4))) for mid in pm.models]
    panel = build_panel(pm, meta, SortScheme())
    doc = render_pixels(panel, Canvas.for_pixels(panel, 40, 50, (10, 10, 10, 10)), side_bar=None)
    ys = sorted({(r.get("y"), r.get("height")) for r in parse(doc).iter(SVG + "rect")})
    assert ys == [("10", "10"), ("20", "10"), ("30", "10")]


def test_fixture_render_budget(appassionata):
    panel = _panel(appassionata)
    start = time.perf_counter()
    doc = render_pixels(panel, Canvas.for_pixels(panel, 600, 860))
    text = doc.text
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    assert len(text.encode("utf-8")) < 2_000_000


def test_pixel_dimension_mismatch(appassionata):
    panel = _panel(appassionata)
    with pytest.raises(DimensionMismatch):
        render_pixels(panel, Canvas(600, 400, (0.5, 10.5), (0, 210)))
    with pytest.raises(DimensionMismatch):
        render_pixels(_panel(appassionata, weights=False), Canvas.for_pixels(panel), grid="weights")


def test_pixel_groups(appassionata):
    panel = _panel(appassionata, power=2)
    root = parse(render_pixels(panel, Canvas.for_pixels(panel)))
    groups = {g.get("class"): g for g in root.iter(SVG + "g")}
    assert len(groups["predictions"]) == len(groups["weights"]) == 210 * 30
    assert len(groups["side-bar"]) == 210
    assert groups["side-bar"][0].get("fill") == grayscale(panel.side_bar[0])


# --- composition and legend -----------------------------------------------------------


def test_single_part_passthrough():
    doc = SvgDoc(10, 20, '<rect x="0" y="0" width="1" height="1" fill="#000000"/>\n')
    out = compose_figure([(doc, Placement())])
    assert out.body == f'<g transform="translate(0,0)">\n{doc.body}</g>\n'
    assert (out.width, out.height) == (10, 20)


def test_scale_mismatch():
    a = SvgDoc(100, 10, "", (10.0, 5.0))
    b = SvgDoc(100, 10, "", (10.0, 6.0))
    with pytest.raises(ScaleMismatch):
        compose_figure([(a, Placement(0, 0, "col")), (b, Placement(0, 20, "col"))])
    compose_figure([(a, Placement(1, 0, "col")), (b, Placement(0, 20, "col"))])
    with pytest.raises(ScaleMismatch):
        compose_figure([(SvgDoc(1, 1, ""), Placement(align_group="col"))])


def test_river_above_pixels_columns_align(appassionata):
    doc = pixel_figure(appassionata, "interval_then_accuracy", powers=(1,), with_river=True)
    root = parse(doc)
    outer = [g for g in root if g.tag == SVG + "g"]
    river = outer[0].find(f"{SVG}g[@class='river']")
    pixels = outer[1].find(f".//{SVG}g[@class='predictions']")
    assert outer[0].get("data-align") == outer[1].get("data-align") == "col0"
    river_xs = sorted({x for p in river.iter(SVG + "path") for x, _ in path_coords(p.get("d"))})
    # step centres t=1..30 appear as polygon vertices; pixel column t spans them symmetrically
    rects = list(pixels)[:30]
    for t, r in enumerate(rects, start=1):
        centre = float(r.get("x")) + float(r.get("width")) / 2
        assert min(abs(centre - x) for x in river_xs) <= 1e-3


def test_weight_power_composition_structure(appassionata):
    doc = pixel_figure(appassionata, "accuracy_desc", powers=(1, 2, 3), with_river=True)
    root = parse(doc)
    outer = [g for g in root if g.tag == SVG + "g"]
    aligned = [g for g in outer if g.get("data-align")]
    assert [g.get("data-align") for g in aligned] == ["col0", "col0", "col1", "col1", "col2", "col2", "col3", "col3"]
    offsets = [float(re.match(r"translate\(([-\d.]+),", g.get("transform")).group(1)) for g in aligned[::2]]
    assert offsets == [0, 612, 1224, 1836]
    assert len(outer) == 9
    assert outer[-1].find(f".//{SVG}g[@class='legend']") is not None
    side_bars = root.findall(f".//{SVG}g[@class='side-bar']")
    assert len(side_bars) == 3


@pytest.mark.parametrize("k", [2, 4])
def test_legend_swatches(k):
    moods = DEFAULT_MOODS if k == 4 else MoodSet.from_labels(["low", "high"])
    root = parse(render_legend(moods))
    swatches = [r for r in root.iter(SVG + "rect") if r.get("data-mood")]
    assert [r.get("fill") for r in swatches] == list(moods.colors)
    ramp = parse(render_legend(moods, ["class-accuracy"]))
    assert len(ramp.findall(f".//{SVG}g[@class='ramp']")) == 1
