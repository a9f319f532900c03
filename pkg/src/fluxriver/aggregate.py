"""Vote aggregation: class-accuracy weights, per-mood vote series, ensemble decisions.

Also hosts the translation of sliding-window predictions onto unit sections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .core import ModelMeta, PredictionMatrix, VoteSeries, WeightingScheme, align_meta
from .errors import EmptyList, InvariantViolation, LTooLarge, WindowCountMismatch, ZeroTotalStep

EXPANSION_POLICIES = ("majority-overlap", "window-start", "window-center")

# Relative tolerance under which two vote totals count as tied.  Scale-free so
# that multiplying every weight by a constant cannot change an ordering.
TIE_RTOL = 1e-12


def unit_section_length(interval_lengths: Sequence[int]) -> int:
    """Greatest common divisor of all interval lengths."""
    if len(interval_lengths) == 0:
        raise EmptyList("unit_section_length needs at least one interval length")
    for length in interval_lengths:
        if int(length) != length or length < 1:
            raise InvariantViolation(f"interval lengths must be positive integers, got {length!r}")
    return reduce(math.gcd, (int(v) for v in interval_lengths))


def expand_windows(
    window_preds: Sequence[int],
    L: int,
    n: int,
    policy: str = "majority-overlap",
) -> list[int]:
    """Translate stride-1 window predictions into one mood per unit section.

    Window ``w`` (0-based) covers sections ``w .. w+L-1``.  Under
    ``majority-overlap`` each section takes the plurality mood of the windows
    covering it; ties go to the window whose centre is nearest the section
    centre, then to the lowest mood id.  ``window-start`` uses the window
    starting at the section (clamped to the last window); ``window-center``
    uses the window centred nearest the section (earlier window on a tie).
    """
    if policy not in EXPANSION_POLICIES:
        raise InvariantViolation(f"unknown expansion policy {policy!r}")
    if L < 1:
        raise InvariantViolation(f"interval length must be >= 1, got {L}")
    if L > n:
        raise LTooLarge(f"interval length {L} exceeds {n} unit sections")
    count = n - L + 1
    preds = [int(p) for p in window_preds]
    if len(preds) != count:
        raise WindowCountMismatch(f"expected {count} windows for L={L}, n={n}; got {len(preds)}")
    if L == 1:
        return preds

    if policy == "window-start":
        return [preds[min(j, count - 1)] for j in range(n)]
    if policy == "window-center":
        half = (L - 1) / 2
        return [preds[min(max(math.floor(j - half), 0), count - 1)] for j in range(n)]

    k = max(preds) + 1
    onehot = np.zeros((count + 1, k), dtype=np.int64)
    onehot[np.arange(1, count + 1), preds] = 1
    prefix = np.cumsum(onehot, axis=0)
    half = (L - 1) / 2
    j_all = np.arange(n)
    lo_all = np.maximum(0, j_all - L + 1)
    hi_all = np.minimum(j_all, count - 1)
    counts_all = prefix[hi_all + 1] - prefix[lo_all]
    is_max = counts_all == counts_all.max(axis=1, keepdims=True)
    out = np.argmax(is_max, axis=1).tolist()
    for j in np.flatnonzero(is_max.sum(axis=1) > 1).tolist():
        lo, hi = int(lo_all[j]), int(hi_all[j])
        tied_set = set(np.flatnonzero(is_max[j]).tolist())
        best_dist = min(abs(w + half - j) for w in range(lo, hi + 1) if preds[w] in tied_set)
        nearest = {preds[w] for w in range(lo, hi + 1) if preds[w] in tied_set and abs(w + half - j) == best_dist}
        out[j] = min(nearest)
    return out


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=float)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _class_accuracies(confusions: np.ndarray, basis: str) -> np.ndarray:
    """Class-accuracy rows for a stack of confusion matrices (m x k x k)."""
    diag = np.einsum("ijj->ij", confusions)
    if basis == "precision":
        return _safe_ratio(diag, confusions.sum(axis=1))
    if basis == "recall":
        return _safe_ratio(diag, confusions.sum(axis=2))
    raise InvariantViolation(f"unknown accuracy basis {basis!r}")


def _macro_f1s(confusions: np.ndarray) -> np.ndarray:
    precision = _class_accuracies(confusions, "precision")
    recall = _class_accuracies(confusions, "recall")
    return _safe_ratio(2 * precision * recall, precision + recall).mean(axis=1)


def _stack(meta: Sequence[ModelMeta]) -> np.ndarray:
    return np.array([mm.confusion for mm in meta], dtype=np.int64)


def class_accuracy(meta: ModelMeta, basis: str = "precision") -> np.ndarray:
    """Per-class accuracy of one model, read off its confusion matrix.

    ``precision``: diagonal over column sums (how often a prediction of c is
    right).  ``recall``: diagonal over row sums.  A zero denominator yields 0.
    """
    return _class_accuracies(_stack([meta]), basis)[0]


def macro_f1(meta: ModelMeta) -> float:
    return float(_macro_f1s(_stack([meta]))[0])


@dataclass(frozen=True, eq=False)
class WeightTable:
    """Class-accuracy of every model (rows follow the prediction matrix)."""

    alpha: np.ndarray
    power: int = 1
    basis: str = "precision"

    def __post_init__(self) -> None:
        alpha = np.array(self.alpha, dtype=float)
        if alpha.ndim != 2 or np.any(alpha < 0) or np.any(alpha > 1):
            raise InvariantViolation("class-accuracy table must be a 2-d array in [0, 1]")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def effective(self) -> np.ndarray:
        return self.alpha**self.power


def weight_table(meta: Sequence[ModelMeta], basis: str = "precision", power: int = 1) -> WeightTable:
    if not meta:
        raise EmptyList("no model metadata")
    return WeightTable(_class_accuracies(_stack(meta), basis), power=power, basis=basis)


def weight_matrix(meta: Sequence[ModelMeta], scheme: WeightingScheme) -> np.ndarray:
    """m x k matrix: the weight model i's vote carries when it predicts class c."""
    m = len(meta)
    if m == 0:
        raise EmptyList("no model metadata")
    k = meta[0].k
    if scheme.kind == "unweighted":
        return np.ones((m, k))
    if scheme.kind == "class_accuracy":
        return weight_table(meta, scheme.basis, scheme.power).effective
    if scheme.kind == "overall_accuracy":
        per_model = np.array([mm.overall_accuracy for mm in meta])
    elif scheme.kind == "overall_accuracy_squared":
        per_model = np.array([mm.overall_accuracy for mm in meta]) ** 2
    else:
        per_model = _macro_f1s(_stack(meta))
    return np.repeat(per_model[:, None], k, axis=1)


def tally(
    pm: PredictionMatrix,
    weights: np.ndarray,
    *,
    normalized: bool = False,
    scheme: WeightingScheme | None = None,
) -> VoteSeries:
    """Sum per-model weights into per-mood votes at every step.

    ``weights`` is an m x k array aligned with ``pm.models``.
    """
    weights = np.asarray(weights, dtype=float)
    k = len(pm.mood_set)
    if weights.shape != (pm.m, k):
        raise InvariantViolation(f"weights shape {weights.shape} != ({pm.m}, {k})")
    applied = weights[np.arange(pm.m)[:, None], pm.cells]
    values = np.stack([np.where(pm.cells == c, applied, 0.0).sum(axis=0) for c in range(k)])
    totals = applied.sum(axis=0)
    if normalized:
        zero = np.flatnonzero(totals == 0)
        if zero.size:
            raise ZeroTotalStep(f"cannot normalize: total weight is 0 at t={int(zero[0]) + 1}")
        values = values / totals
        totals = np.ones_like(totals)
    return VoteSeries(values, totals, scheme, pm.mood_set, n_models=pm.m)


def aggregate_votes(pm: PredictionMatrix, meta: Sequence[ModelMeta], scheme: WeightingScheme) -> VoteSeries:
    ordered = align_meta(pm.models, meta)
    return tally(pm, weight_matrix(ordered, scheme), normalized=scheme.normalized, scheme=scheme)


def order_by_votes(votes: Sequence[float], preference: Sequence[int] | None = None) -> list[int]:
    """Mood ids sorted by descending vote.

    Scanning down the sorted values, each value within ``TIE_RTOL`` (relative
    to the step maximum) of the current group's leader joins that group; a
    group keeps its members in ``preference`` order (default: canonical order).
    """
    v = [float(x) for x in votes]
    k = len(v)
    if preference is None:
        preference = range(k)
    rank = {mood: i for i, mood in enumerate(preference)}
    if sorted(rank) != list(range(k)):
        raise InvariantViolation(f"preference {list(preference)} is not a permutation of 0..{k - 1}")
    tol = TIE_RTOL * max(abs(x) for x in v) if k else 0.0
    by_value = sorted(range(k), key=lambda c: (-v[c], rank[c]))
    out: list[int] = []
    group = [by_value[0]]
    for c in by_value[1:]:
        if v[group[0]] - v[c] <= tol:
            group.append(c)
        else:
            out.extend(sorted(group, key=rank.__getitem__))
            group = [c]
    out.extend(sorted(group, key=rank.__getitem__))
    return out


def ensemble_decisions(vs: VoteSeries) -> list[int]:
    """Winning mood id at every step (index 0 is step 1)."""
    decisions: list[int] = []
    for _, column in vs.steps():
        votes = column.tolist()
        top = max(votes)
        tol = TIE_RTOL * top
        tied = [c for c, x in enumerate(votes) if top - x <= tol]
        if decisions and decisions[-1] in tied:
            decisions.append(decisions[-1])
        else:
            decisions.append(tied[0])
    return decisions


def ensemble_decision(vs: VoteSeries, t: int) -> int:
    """Winning mood id at 1-based step ``t``.

    Ties go to the previous step's winner when it is among the tied moods,
    otherwise to the lowest mood id.
    """
    if not 1 <= t <= vs.n_steps:
        raise IndexError(f"step {t} outside 1..{vs.n_steps}")
    return ensemble_decisions(vs)[t - 1]
