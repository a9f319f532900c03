"""Seeded synthetic bundles and brute-force oracles used by the test-suite.

The oracles here deliberately avoid :mod:`fluxriver.aggregate`; they are
plain loops over the definitions so they can check the vectorised code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .aggregate import expand_windows
from .core import METHODS, Bundle, ModelMeta, PredictionMatrix, VoteSeries, WeightingScheme, default_mood_set
from .errors import InvariantViolation, ZeroTotalStep


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic bundle.

    The true mood is ``segment_moods[s]`` on segment ``s``; segment boundaries
    are ``change_points`` (the first step of each new segment).  Each model
    gets a skill in ``accuracy_spread`` and deviates from the true mood with
    probability ``noise`` scaled down by its skill.  With ``window_blur`` a
    model of interval length L predicts on stride-1 windows of L sections,
    which are then expanded back onto unit sections.
    """

    seed: int = 0
    m: int = 20
    n: int = 30
    k: int = 4
    change_points: tuple[int, ...] = ()
    noise: float = 0.2
    accuracy_spread: tuple[float, float] = (0.55, 0.7)
    segment_moods: tuple[int, ...] | None = None
    window_blur: bool = False
    max_interval: int = 30
    test_per_class: int = 30
    methods: tuple[str, ...] = field(default=METHODS)

    def __post_init__(self) -> None:
        object.__setattr__(self, "change_points", tuple(int(c) for c in self.change_points))
        if self.m < 1 or self.n < 1 or self.k < 2:
            raise InvariantViolation("need m >= 1, n >= 1, k >= 2")
        if not 0 <= self.seed < 2**64:
            raise InvariantViolation("seed must be an unsigned 64-bit integer")
        if not 0.0 <= self.noise <= 1.0:
            raise InvariantViolation(f"noise {self.noise} outside [0, 1]")
        lo, hi = self.accuracy_spread
        if not 0.0 <= lo <= hi <= 1.0:
            raise InvariantViolation(f"accuracy_spread {self.accuracy_spread} must satisfy 0 <= lo <= hi <= 1")
        cps = self.change_points
        if any(b <= a for a, b in zip(cps, cps[1:])) or any(not 1 <= c <= self.n for c in cps):
            raise InvariantViolation("change points must be strictly increasing within [1, n]")
        if self.segment_moods is not None:
            object.__setattr__(self, "segment_moods", tuple(int(c) for c in self.segment_moods))
            if len(self.segment_moods) != len(cps) + 1:
                raise InvariantViolation("need one segment mood per segment")
            if any(not 0 <= c < self.k for c in self.segment_moods):
                raise InvariantViolation("segment mood outside the mood set")
        if self.max_interval < 1 or self.test_per_class < 1 or not self.methods:
            raise InvariantViolation("max_interval, test_per_class and methods must be positive/non-empty")

    def true_moods(self) -> list[int]:
        seg = self.segment_moods or tuple(i % self.k for i in range(len(self.change_points) + 1))
        out = []
        s = 0
        for t in range(1, self.n + 1):
            while s < len(self.change_points) and t >= self.change_points[s]:
                s += 1
            out.append(seg[s])
        return out


PRESETS = {
    # 7 methods x 30 interval lengths over 30 one-second sections; the true
    # mood turns from angry to calm mid-excerpt.
    "appassionata-like": SynthSpec(
        seed=57,
        m=210,
        n=30,
        k=4,
        change_points=(14,),
        noise=0.45,
        accuracy_spread=(0.5, 0.7),
        segment_moods=(1, 3),
        window_blur=True,
    ),
}


def _model_ids(spec: SynthSpec) -> list[tuple[str, str, int]]:
    n_int = min(spec.max_interval, spec.n)
    block = n_int * len(spec.methods)
    out = []
    for j in range(spec.m):
        method = spec.methods[(j // n_int) % len(spec.methods)]
        L = j % n_int + 1
        rep = j // block
        out.append((f"{method}-L{L:02d}" + (f"-r{rep}" if rep else ""), method, L))
    return out


def _window_truth(truth: Sequence[int], L: int, k: int) -> list[int]:
    out = []
    for w in range(len(truth) - L + 1):
        counts = np.bincount(truth[w : w + L], minlength=k)
        best = np.flatnonzero(counts == counts.max())
        centre = truth[w + (L - 1) // 2]
        out.append(centre if centre in best else int(best[0]))
    return out


def generate(spec: SynthSpec) -> Bundle:
    """Build a bundle; a pure function of ``spec``."""
    rng = np.random.default_rng(spec.seed)
    k, n = spec.k, spec.n
    moods = default_mood_set(k)
    truth = spec.true_moods()
    lo, hi = spec.accuracy_spread
    meta: list[ModelMeta] = []
    rows: list[list[int]] = []
    for model_id, method, L in _model_ids(spec):
        skill = rng.uniform(lo, hi)
        q = spec.noise * ((1 - skill) / (1 - lo) if lo < 1 else 1.0)
        q_class = np.minimum(q * rng.uniform(0.5, 1.0, size=k), 1.0)
        N = spec.test_per_class
        confusion = np.zeros((k, k), dtype=np.int64)
        for c in range(k):
            wrong = math.floor(N * q_class[c])
            others = [o for o in range(k) if o != c]
            confusion[c, c] = N - wrong
            confusion[c, others] = rng.multinomial(wrong, rng.dirichlet(np.ones(k - 1)))
        acc = float(np.trace(confusion) / confusion.sum())

        # a wrong prediction follows the off-diagonal mass of the confusion row
        swap = confusion.astype(float)
        np.fill_diagonal(swap, 0.0)
        empty = swap.sum(axis=1) == 0
        swap[empty] = 1.0
        swap[np.arange(k), np.arange(k)] = 0.0
        swap_cdf = np.cumsum(swap / swap.sum(axis=1, keepdims=True), axis=1)

        def predict(targets: Sequence[int]) -> list[int]:
            c = np.asarray(targets, dtype=np.int64)
            wrong = rng.random(c.size) < q_class[c]
            picks = (rng.random(c.size)[:, None] >= swap_cdf[c]).sum(axis=1)
            return np.where(wrong, np.minimum(picks, k - 1), c).tolist()

        if spec.window_blur and L > 1:
            row = expand_windows(predict(_window_truth(truth, L, k)), L, n)
        else:
            row = predict(truth)
        meta.append(ModelMeta(model_id, method, L, acc, tuple(map(tuple, confusion.tolist()))))
        rows.append(row)
    pm = PredictionMatrix(tuple(mm.model_id for mm in meta), np.array(rows, dtype=np.int64), moods)
    return Bundle(moods, tuple(meta), pm)


def random_spec(seed: int, max_m: int = 50, max_n: int = 60, ks: Sequence[int] = (2, 3, 4, 6)) -> SynthSpec:
    """A random but valid spec, itself drawn deterministically from ``seed``."""
    rng = np.random.default_rng([seed, 0xF1])
    m = int(rng.integers(1, max_m + 1))
    n = int(rng.integers(1, max_n + 1))
    k = int(rng.choice(ks))
    n_cp = int(rng.integers(0, min(4, n) + 1))
    cps = tuple(sorted(rng.choice(np.arange(1, n + 1), size=n_cp, replace=False).tolist()))
    lo = float(rng.uniform(0.0, 0.9))
    hi = float(rng.uniform(lo, 1.0))
    return SynthSpec(
        seed=seed,
        m=m,
        n=n,
        k=k,
        change_points=cps,
        noise=float(rng.uniform(0.0, 0.95)),
        accuracy_spread=(lo, hi),
        window_blur=bool(rng.integers(0, 2)),
        test_per_class=int(rng.integers(1, 40)),
    )


# --- oracles ---------------------------------------------------------------


def _oracle_weight(mm: ModelMeta, c: int, scheme: WeightingScheme) -> float:
    cm = mm.confusion
    k = len(cm)
    if scheme.kind == "unweighted":
        return 1.0
    if scheme.kind == "overall_accuracy":
        return mm.overall_accuracy
    if scheme.kind == "overall_accuracy_squared":
        return mm.overall_accuracy * mm.overall_accuracy

    def prec(j: int) -> float:
        col = 0
        for r in range(k):
            col += cm[r][j]
        return cm[j][j] / col if col else 0.0

    def rec(j: int) -> float:
        row = 0
        for p in range(k):
            row += cm[j][p]
        return cm[j][j] / row if row else 0.0

    if scheme.kind == "class_accuracy":
        a = prec(c) if scheme.basis == "precision" else rec(c)
        out = 1.0
        for _ in range(scheme.power):
            out *= a
        return out
    total = 0.0
    for j in range(k):
        p, r = prec(j), rec(j)
        total += 2 * p * r / (p + r) if p + r else 0.0
    return total / k


def oracle_vote_count(pm: PredictionMatrix, meta: Sequence[ModelMeta], scheme: WeightingScheme) -> VoteSeries:
    """Reference tally: one pass over every (step, model) cell."""
    by_id = {mm.model_id: mm for mm in meta}
    k = len(pm.mood_set)
    cells = pm.cells.tolist()
    values = [[0.0] * pm.n_steps for _ in range(k)]
    totals = [0.0] * pm.n_steps
    weight = {}
    for mid in pm.models:
        for c in range(k):
            weight[mid, c] = _oracle_weight(by_id[mid], c, scheme)
    for t in range(pm.n_steps):
        for i, mid in enumerate(pm.models):
            c = cells[i][t]
            values[c][t] += weight[mid, c]
            totals[t] += weight[mid, c]
    if scheme.normalized:
        for t in range(pm.n_steps):
            if totals[t] == 0:
                raise ZeroTotalStep(f"total weight is 0 at t={t + 1}")
            for c in range(k):
                values[c][t] = values[c][t] / totals[t]
            totals[t] = 1.0
    return VoteSeries(np.array(values), np.array(totals), scheme, pm.mood_set, n_models=pm.m)


def oracle_argmax_order(votes: Sequence[float]) -> list[int]:
    """Insertion sort, descending, ties by lower mood id (no tolerance)."""
    out: list[int] = []
    for c in range(len(votes)):
        pos = len(out)
        while pos > 0 and votes[out[pos - 1]] < votes[c]:
            pos -= 1
        out.insert(pos, c)
    return out
