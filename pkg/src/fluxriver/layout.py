"""River geometry for the stacked designs and for the dual-flux ThemeRiver.

All geometry is in data coordinates: step ``t`` is centred at ``x = t`` and
owns ``[t - 0.5, t + 0.5]``; heights are in vote units with the baseline at 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .aggregate import order_by_votes
from .core import VoteSeries
from .errors import InvariantViolation

BASE_LINE = 0.0
DESIGNS = ("stacked", "themeriver", "dualflux")
SMOOTHING = ("blocky", "smooth")

Point = tuple[float, float]


@dataclass(frozen=True)
class StepLayout:
    """Dual-flux positions at one step.

    ``extents[c]`` is ``(y_low, y_high)`` for mood id ``c``.
    """

    t: int
    order: tuple[int, ...]
    extents: tuple[tuple[float, float], ...]
    threshold_upper: float
    threshold_lower: float


@dataclass(frozen=True)
class Polygon:
    mood: int
    points: tuple[Point, ...]

    @property
    def x_range(self) -> tuple[float, float]:
        xs = [p[0] for p in self.points]
        return min(xs), max(xs)


@dataclass(frozen=True)
class RiverGeometry:
    design: str
    polygons: tuple[Polygon, ...]
    gridlines: tuple[tuple[Point, ...], ...]
    x_domain: tuple[float, float]
    steps: tuple[StepLayout, ...] = ()

    def y_bounds(self) -> tuple[float, float]:
        ys = [y for poly in self.polygons for _, y in poly.points]
        ys += [y for line in self.gridlines for _, y in line]
        return min(ys), max(ys)

    def by_mood(self, mood: int) -> list[Polygon]:
        return [p for p in self.polygons if p.mood == mood]


def assign_order(votes: Sequence[float], prev_order: Sequence[int] | None = None) -> list[int]:
    """Mood ids by descending vote; ties keep ``prev_order`` rank, else canonical order."""
    if len(votes) < 2:
        raise InvariantViolation("need at least two moods")
    return order_by_votes(votes, prev_order)


def assign_positions(votes: Sequence[float], order: Sequence[int], t: int = 1) -> StepLayout:
    """Stack one step: the top-ranked mood above the baseline, the rest below it.

    The rank-2 mood sits directly under the baseline and each later rank is
    stacked further down.
    """
    v = [float(x) for x in votes]
    if sorted(order) != list(range(len(v))):
        raise InvariantViolation(f"order {list(order)} is not a permutation of the moods")
    extents: list[tuple[float, float]] = [(0.0, 0.0)] * len(v)
    main = order[0]
    extents[main] = (BASE_LINE, BASE_LINE + v[main])
    cur = BASE_LINE
    for idx in order[1:]:
        extents[idx] = (cur - v[idx], cur)
        cur -= v[idx]
    half = sum(v) / 2
    return StepLayout(t, tuple(order), tuple(extents), BASE_LINE + half, BASE_LINE - half)


def dualflux_steps(vs: VoteSeries) -> list[StepLayout]:
    steps: list[StepLayout] = []
    prev: list[int] | None = None
    for t, votes in vs.steps():
        order = assign_order(votes, prev)
        steps.append(assign_positions(votes, order, t))
        prev = order
    return steps


def _quad(mood: int, x0: float, x1: float, left: tuple[float, float], right: tuple[float, float]) -> Polygon:
    # clockwise from top-left: top edge, right side, bottom edge, left side
    return Polygon(mood, ((x0, left[1]), (x1, right[1]), (x1, right[0]), (x0, left[0])))


def _sorted(polys: list[Polygon]) -> tuple[Polygon, ...]:
    return tuple(sorted(polys, key=lambda p: (p.mood, p.x_range[0])))


def layout_dualflux(vs: VoteSeries, smoothing: str = "smooth") -> RiverGeometry:
    """Dual-flux ThemeRiver.

    ``blocky`` draws one block per mood per step.  ``smooth`` interpolates
    between consecutive step centres while the ordering is unchanged; when
    it changes, the old extents are held to the half step and the new ones
    start there, leaving a vertical seam.
    """
    if smoothing not in SMOOTHING:
        raise InvariantViolation(f"unknown smoothing {smoothing!r}")
    steps = dualflux_steps(vs)
    n, k = vs.n_steps, vs.k
    polys: list[Polygon] = []
    upper: list[Point] = []
    lower: list[Point] = []

    if smoothing == "blocky":
        for s in steps:
            x0, x1 = s.t - 0.5, s.t + 0.5
            for c in range(k):
                polys.append(_quad(c, x0, x1, s.extents[c], s.extents[c]))
            upper += [(x0, s.threshold_upper), (x1, s.threshold_upper)]
            lower += [(x0, s.threshold_lower), (x1, s.threshold_lower)]
    else:
        first = steps[0]
        for c in range(k):
            polys.append(_quad(c, 0.5, 1.0, first.extents[c], first.extents[c]))
        upper += [(0.5, first.threshold_upper), (1.0, first.threshold_upper)]
        lower += [(0.5, first.threshold_lower), (1.0, first.threshold_lower)]
        for pre, cur in zip(steps, steps[1:]):
            t = cur.t
            if pre.order == cur.order:
                for c in range(k):
                    polys.append(_quad(c, t - 1, t, pre.extents[c], cur.extents[c]))
            else:
                mid = t - 0.5
                for c in range(k):
                    polys.append(_quad(c, t - 1, mid, pre.extents[c], pre.extents[c]))
                    polys.append(_quad(c, mid, t, cur.extents[c], cur.extents[c]))
                upper += [(mid, pre.threshold_upper), (mid, cur.threshold_upper)]
                lower += [(mid, pre.threshold_lower), (mid, cur.threshold_lower)]
            upper.append((float(t), cur.threshold_upper))
            lower.append((float(t), cur.threshold_lower))
        last = steps[-1]
        for c in range(k):
            polys.append(_quad(c, float(n), n + 0.5, last.extents[c], last.extents[c]))
        upper.append((n + 0.5, last.threshold_upper))
        lower.append((n + 0.5, last.threshold_lower))

    return RiverGeometry(
        "dualflux",
        _sorted(polys),
        (tuple(upper), tuple(lower)),
        (0.5, n + 0.5),
        tuple(steps),
    )


def _band_polygons(lows: np.ndarray, highs: np.ndarray) -> tuple[Polygon, ...]:
    """One polygon per mood spanning the whole x range.

    ``lows``/``highs`` are k x n; values are held flat over the outer half
    steps and interpolated linearly between step centres.
    """
    k, n = lows.shape
    xs = [0.5] + [float(t) for t in range(1, n + 1)] + [n + 0.5]
    polys = []
    for c in range(k):
        top = [highs[c, 0]] + list(highs[c]) + [highs[c, -1]]
        bottom = [lows[c, 0]] + list(lows[c]) + [lows[c, -1]]
        pts = [(x, float(y)) for x, y in zip(xs, top)]
        pts += [(x, float(y)) for x, y in zip(reversed(xs), reversed(bottom))]
        polys.append(Polygon(c, tuple(pts)))
    return tuple(polys)


def _stack(vs: VoteSeries, base: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    tops = base + np.cumsum(vs.values, axis=0)
    lows = np.vstack([base[None, :], tops[:-1]])
    return lows, tops


def layout_stacked(vs: VoteSeries) -> RiverGeometry:
    """Stacked line graph: moods in canonical order from the baseline up."""
    lows, highs = _stack(vs, np.zeros(vs.n_steps))
    return RiverGeometry("stacked", _band_polygons(lows, highs), (), (0.5, vs.n_steps + 0.5))


def layout_themeriver(vs: VoteSeries) -> RiverGeometry:
    """ThemeRiver: the stacked graph re-centred so the river is symmetric about 0."""
    lows, highs = _stack(vs, -np.asarray(vs.totals) / 2)
    return RiverGeometry("themeriver", _band_polygons(lows, highs), (), (0.5, vs.n_steps + 0.5))


def layout(vs: VoteSeries, design: str, smoothing: str = "smooth") -> RiverGeometry:
    if design == "stacked":
        return layout_stacked(vs)
    if design == "themeriver":
        return layout_themeriver(vs)
    if design == "dualflux":
        return layout_dualflux(vs, smoothing)
    raise InvariantViolation(f"unknown design {design!r}; expected one of {DESIGNS}")


def slice_at(geometry: RiverGeometry, x: float) -> dict[int, tuple[float, float]]:
    """Vertical extent of every mood where the geometry crosses ``x``.

    Polygons are y-monotone quads or bands, so each edge pair is linear in x.
    When ``x`` lands on a seam the polygon whose span starts at ``x`` wins.
    """
    out: dict[int, tuple[float, float]] = {}
    for poly in geometry.polygons:
        x0, x1 = poly.x_range
        if not x0 <= x <= x1:
            continue
        if poly.mood in out and x == x1:
            continue
        out[poly.mood] = _poly_extent(poly, x)
    return out


def _poly_extent(poly: Polygon, x: float) -> tuple[float, float]:
    pts = poly.points
    half = len(pts) // 2
    top, bottom = pts[:half], list(reversed(pts[half:]))
    return _interp(bottom, x), _interp(top, x)


def _interp(line: Sequence[Point], x: float) -> float:
    for (xa, ya), (xb, yb) in zip(line, line[1:]):
        if xa <= x <= xb:
            if x == xa:
                return ya
            if x == xb:
                return yb
            return ya + (yb - ya) * (x - xa) / (xb - xa)
    raise ValueError(f"x={x} outside polyline")
