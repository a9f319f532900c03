"""Per-model pixel maps: one row per model, one column per unit section."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .aggregate import WeightTable
from .core import METHODS, ModelMeta, PredictionMatrix, align_meta
from .errors import DimensionMismatch, EmptyList, InvariantViolation

SORT_SCHEMES = ("accuracy_desc", "method_then_interval", "interval_then_accuracy")


@dataclass(frozen=True)
class SortScheme:
    kind: str = "accuracy_desc"
    method_order: tuple[str, ...] = METHODS

    def __post_init__(self) -> None:
        if self.kind not in SORT_SCHEMES:
            raise InvariantViolation(f"unknown sort scheme {self.kind!r}; expected one of {SORT_SCHEMES}")


def sort_rows(meta: Sequence[ModelMeta], scheme: SortScheme) -> list[int]:
    """Row permutation (indices into ``meta``) for the given sort scheme.

    Methods missing from ``scheme.method_order`` sort after the listed ones,
    alphabetically.  Every scheme breaks remaining ties by ``model_id``.
    """
    if not meta:
        raise EmptyList("cannot sort an empty model list")
    methods = {name: i for i, name in enumerate(scheme.method_order)}

    def method_key(mm: ModelMeta) -> tuple[int, str]:
        return (methods.get(mm.method, len(methods)), mm.method)

    if scheme.kind == "accuracy_desc":
        key = lambda i: (-meta[i].overall_accuracy, meta[i].model_id)  # noqa: E731
    elif scheme.kind == "method_then_interval":
        key = lambda i: (method_key(meta[i]), meta[i].interval_length, meta[i].model_id)  # noqa: E731
    else:
        key = lambda i: (meta[i].interval_length, -meta[i].overall_accuracy, meta[i].model_id)  # noqa: E731
    return sorted(range(len(meta)), key=key)


@dataclass(frozen=True, eq=False)
class PixelPanel:
    """Sorted pixel grids ready for rendering.

    Row ``r`` of every grid shows model ``models[r]``, which is row
    ``row_order[r]`` of the source prediction matrix.
    """

    row_order: tuple[int, ...]
    models: tuple[str, ...]
    prediction_grid: np.ndarray
    weight_grid: np.ndarray | None
    side_bar: np.ndarray
    power: int = 1

    def __post_init__(self) -> None:
        m = len(self.row_order)
        if sorted(self.row_order) != list(range(m)):
            raise InvariantViolation("row_order must be a permutation of the model rows")
        if self.prediction_grid.shape[0] != m or self.side_bar.shape != (m,):
            raise DimensionMismatch("grid/side-bar rows disagree with row_order")
        if self.weight_grid is not None and self.weight_grid.shape != self.prediction_grid.shape:
            raise DimensionMismatch("weight grid and prediction grid differ in shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.prediction_grid.shape


def build_panel(
    pm: PredictionMatrix,
    meta: Sequence[ModelMeta],
    scheme: SortScheme,
    weights: WeightTable | None = None,
    power: int = 1,
) -> PixelPanel:
    """Sort the prediction rows and attach class-accuracy and accuracy bars.

    ``weights.alpha`` must follow ``pm.models`` row order; the weight grid cell
    is the class-accuracy of the mood that model predicted, raised to
    ``power``.  The side bar is overall accuracy raised to ``power``.
    """
    ordered = align_meta(pm.models, meta)
    order = sort_rows(ordered, scheme)
    idx = np.array(order)
    grid = pm.cells[idx]
    weight_grid = None
    if weights is not None:
        alpha = weights.alpha
        if alpha.shape != (pm.m, len(pm.mood_set)):
            raise DimensionMismatch(f"weight table {alpha.shape} does not match {pm.m} models x {len(pm.mood_set)} moods")
        weight_grid = (alpha**power)[idx[:, None], grid]
    side = np.array([ordered[i].overall_accuracy for i in order]) ** power
    return PixelPanel(tuple(order), tuple(pm.models[i] for i in order), grid, weight_grid, side, power)
