"""Domain types shared by every other module.

Steps are 1-based wherever they appear in public signatures (``t`` in
``1..n``); arrays are stored 0-based.  Mood ids are indices into a
:class:`MoodSet` and double as the canonical tie-break rank.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvariantViolation

DEFAULT_MOOD_LABELS = ("delighted", "angry", "sad", "calm")
DEFAULT_MOOD_COLORS = ("#F2C945", "#D94A3D", "#4472C4", "#5BA85B")

# Extra labels/colours used when a run needs more than four classes.
_EXTRA_LABELS = ("excited", "tense", "bored", "relaxed", "serene", "gloomy")
_EXTRA_COLORS = ("#E08A2E", "#8E5BB5", "#7F7F7F", "#3FB8AF", "#A4C639", "#5A3E36")

# Listing order of the decision-tree family used by the pixel-map sort.
METHODS = ("DT", "bagging", "adaboost", "GBDT", "XGBoost", "RF", "gcForest")

_HEX = re.compile(r"^#[0-9A-Fa-f]{6}$")
SUM_TOL = 1e-9


@dataclass(frozen=True)
class Mood:
    id: int
    label: str
    color: str

    def __post_init__(self) -> None:
        if self.id < 0:
            raise InvariantViolation(f"mood id must be non-negative, got {self.id}")
        if not self.label:
            raise InvariantViolation("mood label must be non-empty")
        if not _HEX.match(self.color):
            raise InvariantViolation(f"mood color must be #RRGGBB, got {self.color!r}")


@dataclass(frozen=True)
class MoodSet:
    """Ordered set of moods; list position is the canonical rank."""

    moods: tuple[Mood, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "moods", tuple(self.moods))
        if len(self.moods) < 2:
            raise InvariantViolation("a mood set needs at least 2 moods")
        for i, mood in enumerate(self.moods):
            if mood.id != i:
                raise InvariantViolation(f"mood ids must be 0..k-1 in order; position {i} has id {mood.id}")
        labels = [m.label for m in self.moods]
        if len(set(labels)) != len(labels):
            raise InvariantViolation(f"duplicate mood labels in {labels}")

    @classmethod
    def from_labels(cls, labels: Sequence[str], colors: Sequence[str] | None = None) -> MoodSet:
        if colors is None:
            colors = [default_color(label, i) for i, label in enumerate(labels)]
        return cls(tuple(Mood(i, label, color) for i, (label, color) in enumerate(zip(labels, colors))))

    def __len__(self) -> int:
        return len(self.moods)

    def __iter__(self):
        return iter(self.moods)

    def __getitem__(self, i: int) -> Mood:
        return self.moods[i]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.moods)

    @property
    def colors(self) -> tuple[str, ...]:
        return tuple(m.color for m in self.moods)

    def index(self, label: str) -> int:
        """Mood id for ``label``; raises ``KeyError`` if absent."""
        for m in self.moods:
            if m.label == label:
                return m.id
        raise KeyError(label)

    def with_colors(self, overrides: dict[str, str]) -> MoodSet:
        unknown = set(overrides) - set(self.labels)
        if unknown:
            raise InvariantViolation(f"palette override for unknown moods: {sorted(unknown)}")
        return MoodSet.from_labels(self.labels, [overrides.get(m.label, m.color) for m in self.moods])


def default_color(label: str, i: int) -> str:
    if label in DEFAULT_MOOD_LABELS:
        return DEFAULT_MOOD_COLORS[DEFAULT_MOOD_LABELS.index(label)]
    if label in _EXTRA_LABELS:
        return _EXTRA_COLORS[_EXTRA_LABELS.index(label)]
    palette = DEFAULT_MOOD_COLORS + _EXTRA_COLORS
    return palette[i % len(palette)]


def default_mood_set(k: int = 4) -> MoodSet:
    """The four default moods, extended with extra named moods for ``k > 4``."""
    if k < 2:
        raise InvariantViolation("a mood set needs at least 2 moods")
    names = list(DEFAULT_MOOD_LABELS + _EXTRA_LABELS)
    while len(names) < k:
        names.append(f"mood{len(names)}")
    return MoodSet.from_labels(names[:k])


DEFAULT_MOODS = default_mood_set(4)


@dataclass(frozen=True)
class ModelMeta:
    """Per-model attributes.  ``confusion`` rows are true class, columns predicted."""

    model_id: str
    method: str
    interval_length: int
    overall_accuracy: float
    confusion: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "confusion", tuple(tuple(int(v) for v in row) for row in self.confusion))
        if not self.model_id:
            raise InvariantViolation("model_id must be non-empty")
        if self.interval_length < 1:
            raise InvariantViolation(f"{self.model_id}: interval_length must be >= 1")
        if not 0.0 <= self.overall_accuracy <= 1.0:
            raise InvariantViolation(f"{self.model_id}: overall_accuracy outside [0, 1]")
        k = len(self.confusion)
        if any(len(row) != k for row in self.confusion):
            raise InvariantViolation(f"{self.model_id}: confusion matrix must be square")
        if any(v < 0 for row in self.confusion for v in row):
            raise InvariantViolation(f"{self.model_id}: confusion counts must be >= 0")

    @property
    def k(self) -> int:
        return len(self.confusion)

    def confusion_array(self) -> np.ndarray:
        return np.array(self.confusion, dtype=float)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PredictionMatrix:
    """m models x n unit sections of mood ids; row i is model ``models[i]``."""

    models: tuple[str, ...]
    cells: np.ndarray
    mood_set: MoodSet = DEFAULT_MOODS

    def __post_init__(self) -> None:
        object.__setattr__(self, "models", tuple(self.models))
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[0] != len(self.models) or cells.shape[1] < 1:
            raise InvariantViolation(f"cells shape {cells.shape} does not match {len(self.models)} models")
        if len(self.models) < 1:
            raise InvariantViolation("prediction matrix needs at least one model")
        if len(set(self.models)) != len(self.models):
            raise InvariantViolation("model ids must be unique")
        if cells.dtype.kind not in "iu":
            raise InvariantViolation("cells must hold integer mood ids")
        if cells.min() < 0 or cells.max() >= len(self.mood_set):
            raise InvariantViolation("cell holds a mood id outside the mood set")
        object.__setattr__(self, "cells", _frozen(cells.astype(np.int64)))

    @property
    def m(self) -> int:
        return len(self.models)

    @property
    def n_steps(self) -> int:
        return self.cells.shape[1]

    def row(self, model_id: str) -> np.ndarray:
        return self.cells[self.models.index(model_id)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PredictionMatrix):
            return NotImplemented
        return (
            self.models == other.models
            and self.mood_set == other.mood_set
            and np.array_equal(self.cells, other.cells)
        )

    __hash__ = None  # type: ignore[assignment]


WEIGHTING_KINDS = ("unweighted", "class_accuracy", "overall_accuracy", "overall_accuracy_squared", "f1")
BASES = ("precision", "recall")

# CLI spelling -> (kind, power)
_FLAGS = {
    "none": ("unweighted", 1),
    "alpha": ("class_accuracy", 1),
    "alpha2": ("class_accuracy", 2),
    "alpha3": ("class_accuracy", 3),
    "acc": ("overall_accuracy", 1),
    "acc2": ("overall_accuracy_squared", 1),
    "f1": ("f1", 1),
}


@dataclass(frozen=True)
class WeightingScheme:
    """How each vote is weighted.

    ``basis`` only matters for ``class_accuracy``: ``"precision"`` reads the
    class-accuracy off the predicted-class column of the confusion matrix,
    ``"recall"`` off the true-class row.
    """

    kind: str = "unweighted"
    power: int = 1
    normalized: bool = False
    basis: str = "precision"

    def __post_init__(self) -> None:
        if self.kind not in WEIGHTING_KINDS:
            raise InvariantViolation(f"unknown weighting kind {self.kind!r}")
        if self.kind == "class_accuracy" and self.power not in (1, 2, 3):
            raise InvariantViolation(f"class-accuracy power must be 1, 2 or 3, got {self.power}")
        if self.kind != "class_accuracy" and self.power != 1:
            raise InvariantViolation(f"power only applies to class_accuracy, got {self.power}")
        if self.basis not in BASES:
            raise InvariantViolation(f"unknown accuracy basis {self.basis!r}")

    @classmethod
    def from_flag(cls, flag: str, *, normalized: bool = False, basis: str = "precision") -> WeightingScheme:
        try:
            kind, power = _FLAGS[flag]
        except KeyError:
            raise InvariantViolation(f"unknown weighting {flag!r}; expected one of {sorted(_FLAGS)}") from None
        return cls(kind, power, normalized, basis)

    @property
    def flag(self) -> str:
        for name, (kind, power) in _FLAGS.items():
            if kind == self.kind and power == self.power:
                return name
        raise AssertionError("unreachable")


WEIGHTING_FLAGS = tuple(_FLAGS)


@dataclass(frozen=True, eq=False)
class VoteSeries:
    """Per-mood vote totals over time.

    ``values[c, t-1]`` is the (possibly weighted) vote for mood ``c`` at step
    ``t``; ``totals[t-1]`` is the step total.  ``scheme`` is ``None`` when the
    series was tallied from caller-supplied weights.
    """

    values: np.ndarray
    totals: np.ndarray
    scheme: WeightingScheme | None
    mood_set: MoodSet = DEFAULT_MOODS
    n_models: int | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        totals = np.asarray(self.totals, dtype=float)
        if values.ndim != 2 or values.shape[0] != len(self.mood_set) or values.shape[1] < 1:
            raise InvariantViolation(f"values shape {values.shape} does not match {len(self.mood_set)} moods")
        if totals.shape != (values.shape[1],):
            raise InvariantViolation("totals must have one entry per step")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InvariantViolation("vote values must be finite and >= 0")
        tol = SUM_TOL * np.maximum(1.0, np.abs(totals))
        bad = np.nonzero(np.abs(values.sum(axis=0) - totals) > tol)[0]
        if bad.size:
            raise InvariantViolation(f"votes do not sum to the step total at t={int(bad[0]) + 1}")
        if self.scheme is not None:
            if self.scheme.normalized and np.any(np.abs(totals - 1.0) > SUM_TOL):
                raise InvariantViolation("normalized series must total 1 at every step")
            if (
                self.scheme.kind == "unweighted"
                and not self.scheme.normalized
                and self.n_models is not None
                and np.any(totals != self.n_models)
            ):
                raise InvariantViolation("unweighted series must total m at every step")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "totals", _frozen(totals))

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    def at(self, t: int) -> np.ndarray:
        """Vote vector (indexed by mood id) at 1-based step ``t``."""
        if not 1 <= t <= self.n_steps:
            raise IndexError(f"step {t} outside 1..{self.n_steps}")
        return self.values[:, t - 1]

    def series(self, mood: int | str) -> np.ndarray:
        if isinstance(mood, str):
            mood = self.mood_set.index(mood)
        return self.values[mood]

    def steps(self) -> Iterable[tuple[int, np.ndarray]]:
        for t in range(1, self.n_steps + 1):
            yield t, self.values[:, t - 1]


@dataclass(frozen=True)
class Bundle:
    """Everything one run needs: the mood set plus models with their predictions."""

    mood_set: MoodSet
    meta: tuple[ModelMeta, ...]
    predictions: PredictionMatrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "meta", tuple(self.meta))
        ids = [m.model_id for m in self.meta]
        if len(set(ids)) != len(ids):
            raise InvariantViolation("duplicate model_id in metadata")
        if set(ids) != set(self.predictions.models):
            missing = sorted(set(self.predictions.models) - set(ids))
            extra = sorted(set(ids) - set(self.predictions.models))
            raise InvariantViolation(f"metadata/prediction model mismatch: missing={missing} extra={extra}")
        if self.predictions.mood_set != self.mood_set:
            raise InvariantViolation("predictions use a different mood set")
        k = len(self.mood_set)
        for m in self.meta:
            if m.k != k:
                raise InvariantViolation(f"{m.model_id}: confusion is {m.k}x{m.k}, expected {k}x{k}")

    def meta_by_id(self) -> dict[str, ModelMeta]:
        return {m.model_id: m for m in self.meta}

    def ordered_meta(self) -> list[ModelMeta]:
        """Metadata aligned with the prediction-matrix row order."""
        by_id = self.meta_by_id()
        return [by_id[mid] for mid in self.predictions.models]


def align_meta(models: Sequence[str], meta: Iterable[ModelMeta]) -> list[ModelMeta]:
    """Reorder ``meta`` to follow ``models``; raises if any model is uncovered."""
    by_id = {m.model_id: m for m in meta}
    missing = [mid for mid in models if mid not in by_id]
    if missing:
        raise InvariantViolation(f"no metadata for models {missing[:5]}")
    return [by_id[mid] for mid in models]


__all__ = [
    "Bundle",
    "DEFAULT_MOODS",
    "METHODS",
    "ModelMeta",
    "Mood",
    "MoodSet",
    "PredictionMatrix",
    "VoteSeries",
    "WeightingScheme",
    "WEIGHTING_FLAGS",
    "align_meta",
    "default_mood_set",
]
