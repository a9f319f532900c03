import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxriver.aggregate import (
    EXPANSION_POLICIES,
    aggregate_votes,
    class_accuracy,
    ensemble_decision,
    ensemble_decisions,
    expand_windows,
    macro_f1,
    tally,
    unit_section_length,
    weight_matrix,
)
from fluxriver.core import ModelMeta, MoodSet, PredictionMatrix, VoteSeries, WeightingScheme
from fluxriver.errors import EmptyList, LTooLarge, WindowCountMismatch, ZeroTotalStep
from fluxriver.synth import SynthSpec, generate, oracle_vote_count

D, A, S, C = range(4)


def euclid(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def gcd_oracle(values):
    g = values[0]
    for v in values[1:]:
        g = euclid(g, v)
    return g


def coverage_oracle(preds, L, n):
    """Enumerate, for each section, every window that covers it."""
    out = []
    for j in range(n):
        covering = [w for w in range(len(preds)) if w <= j < w + L]
        counts = {}
        for w in covering:
            counts[preds[w]] = counts.get(preds[w], 0) + 1
        best = max(counts.values())
        tied = [c for c in counts if counts[c] == best]
        if len(tied) == 1:
            out.append(tied[0])
            continue
        dist = {w: abs((w + (L - 1) / 2) - j) for w in covering if preds[w] in tied}
        closest = min(dist.values())
        out.append(min(preds[w] for w, d in dist.items() if d == closest))
    return out


def perfect(k=4):
    return tuple(tuple(5 if i == j else 0 for j in range(k)) for i in range(k))


# --- unit sections ----------------------------------------------------------


def test_unit_section_length_examples():
    assert unit_section_length(list(range(1, 31))) == 1
    assert unit_section_length([6]) == 6
    assert unit_section_length([4, 6, 10]) == gcd_oracle([4, 6, 10]) == 2
    with pytest.raises(EmptyList):
        unit_section_length([])


@given(st.lists(st.integers(1, 500), min_size=1, max_size=12))
def test_unit_section_length_matches_euclid(values):
    assert unit_section_length(values) == gcd_oracle(values)


# --- window expansion -----------------------------------------------------


def test_expand_identity_for_unit_windows():
    preds = [A, C, S, S, D]
    for policy in EXPANSION_POLICIES:
        assert expand_windows(preds, 1, 5, policy) == preds


def test_expand_two_windows_tie_goes_to_canonical_order():
    assert coverage_oracle([A, C], 2, 3) == [A, A, C]
    assert expand_windows([A, C], 2, 3) == [A, A, C]


def test_expand_single_window_covers_everything():
    assert expand_windows([S], 7, 7) == [S] * 7


def test_expand_errors():
    with pytest.raises(WindowCountMismatch):
        expand_windows([A, A], 2, 4)
    with pytest.raises(LTooLarge):
        expand_windows([A], 5, 4)


def test_expand_alternative_policies():
    # windows of length 3 over 5 sections: starts 0,1,2
    assert expand_windows([A, C, S], 3, 5, "window-start") == [A, C, S, S, S]
    assert expand_windows([A, C, S], 3, 5, "window-center") == [A, A, C, S, S]


@settings(max_examples=200)
@given(data=st.data())
def test_expand_matches_coverage_oracle(data):
    n = data.draw(st.integers(1, 25))
    L = data.draw(st.integers(1, n))
    preds = data.draw(st.lists(st.integers(0, 3), min_size=n - L + 1, max_size=n - L + 1))
    assert expand_windows(preds, L, n) == coverage_oracle(preds, L, n)


# --- class accuracy --------------------------------------------------------


def test_class_accuracy_perfect():
    mm = ModelMeta("m", "DT", 1, 1.0, perfect())
    assert class_accuracy(mm, "precision").tolist() == [1.0] * 4
    assert class_accuracy(mm, "recall").tolist() == [1.0] * 4


def test_class_accuracy_two_moods():
    mm = ModelMeta("m", "DT", 1, 0.75, ((8, 2), (3, 7)))
    assert class_accuracy(mm, "precision").tolist() == [8 / 11, 7 / 9]
    assert class_accuracy(mm, "recall").tolist() == [0.8, 0.7]


def test_class_accuracy_zero_column():
    mm = ModelMeta("m", "DT", 1, 0.5, ((5, 0, 0), (5, 0, 0), (0, 0, 5)))
    assert class_accuracy(mm, "precision")[1] == 0.0
    assert class_accuracy(mm, "recall")[1] == 0.0


def test_macro_f1():
    mm = ModelMeta("m", "DT", 1, 0.75, ((8, 2), (3, 7)))
    p, r = [8 / 11, 7 / 9], [0.8, 0.7]
    f = [2 * p[i] * r[i] / (p[i] + r[i]) for i in range(2)]
    assert macro_f1(mm) == pytest.approx(sum(f) / 2, abs=1e-15)


# --- aggregation ------------------------------------------------------------


def _meta(ids, cm=None):
    return [ModelMeta(mid, "DT", 1, 0.5, cm or perfect()) for mid in ids]


def test_three_models_unweighted():
    pm = PredictionMatrix(("a", "b", "c"), np.array([[A], [C], [C]]))
    vs = aggregate_votes(pm, _meta(pm.models), WeightingScheme())
    assert vs.at(1).tolist() == [0.0, 1.0, 0.0, 2.0]
    assert vs.totals.tolist() == [3.0]


def test_normalized_sums_to_one(appassionata):
    for flag in ("none", "alpha", "alpha2", "acc", "f1"):
        scheme = WeightingScheme.from_flag(flag, normalized=True)
        vs = aggregate_votes(appassionata.predictions, appassionata.meta, scheme)
        assert np.all(np.abs(vs.values.sum(axis=0) - 1.0) <= 1e-9)


def test_210_models_unweighted(appassionata):
    vs = aggregate_votes(appassionata.predictions, appassionata.meta, WeightingScheme())
    assert np.all(vs.totals == 210)


def test_zero_total_step_on_normalize():
    cm = ((5, 0), (5, 0))  # never right about class 1
    pm = PredictionMatrix(("a",), np.array([[1, 0]]), MoodSet.from_labels(["x", "y"]))
    meta = [ModelMeta("a", "DT", 1, 0.5, cm)]
    aggregate_votes(pm, meta, WeightingScheme("class_accuracy"))
    with pytest.raises(ZeroTotalStep):
        aggregate_votes(pm, meta, WeightingScheme("class_accuracy", normalized=True))


def test_model_level_schemes():
    cm = ((8, 2), (3, 7))
    meta = [ModelMeta("a", "DT", 1, 0.6, cm), ModelMeta("b", "RF", 2, 0.9, cm)]
    pm = PredictionMatrix(("a", "b"), np.array([[0], [1]]), MoodSet.from_labels(["x", "y"]))
    assert aggregate_votes(pm, meta, WeightingScheme("overall_accuracy")).at(1).tolist() == [0.6, 0.9]
    sq = aggregate_votes(pm, meta, WeightingScheme("overall_accuracy_squared")).at(1)
    assert sq.tolist() == [0.36, 0.81]
    f1 = aggregate_votes(pm, meta, WeightingScheme("f1")).at(1)
    assert f1[0] == f1[1] == macro_f1(meta[0])


@pytest.mark.parametrize("flag", ["none", "alpha", "alpha2", "alpha3", "acc", "acc2", "f1"])
@pytest.mark.parametrize("basis", ["precision", "recall"])
@pytest.mark.parametrize("seed", range(6))
def test_matches_oracle(flag, basis, seed):
    b = generate(SynthSpec(seed=seed, m=30, n=25, k=4, noise=0.6, window_blur=True))
    scheme = WeightingScheme.from_flag(flag, basis=basis)
    got = aggregate_votes(b.predictions, b.meta, scheme)
    want = oracle_vote_count(b.predictions, b.meta, scheme)
    if flag == "none":
        assert np.array_equal(got.values, want.values)
    else:
        assert np.max(np.abs(got.values - want.values)) <= 1e-12


# --- decisions ------------------------------------------------------------------


def _series(columns):
    v = np.array(columns, dtype=float).T
    return VoteSeries(v, v.sum(axis=0), None)


def test_decision_unanimous():
    assert ensemble_decision(_series([[0, 7, 0, 0]]), 1) == A


def test_decision_linear_scan():
    votes = [3, 5, 1, 1]
    best = 0
    for c in range(4):
        if votes[c] > votes[best]:
            best = c
    assert ensemble_decision(_series([votes]), 1) == best == A


def test_decision_ties_prefer_previous_winner():
    vs = _series([[0, 1, 0, 3], [0, 2, 0, 2], [2, 2, 0, 0]])
    assert ensemble_decisions(vs) == [C, C, D]


def test_precision_weights_flip_a_tie():
    # model "sure" predicts calm and is right 90% of the time it says calm;
    # model "unsure" predicts angry and is right 40% of the time it says angry.
    sure = ((5, 0, 0, 0), (0, 5, 0, 0), (0, 0, 4, 1), (0, 0, 0, 9))
    unsure = ((5, 0, 0, 0), (0, 2, 0, 0), (0, 3, 5, 0), (0, 0, 0, 5))
    meta = [ModelMeta("sure", "RF", 1, 0.9, sure), ModelMeta("unsure", "DT", 1, 0.6, unsure)]
    pm = PredictionMatrix(("sure", "unsure"), np.array([[C], [A]]))
    alpha = {"sure": sure[C][C] / sum(r[C] for r in sure), "unsure": unsure[A][A] / sum(r[A] for r in unsure)}
    assert alpha == {"sure": 0.9, "unsure": 0.4}
    # brute force both weightings
    expected = {}
    for name, w in (("none", {"sure": 1.0, "unsure": 1.0}), ("alpha", alpha)):
        v = [0.0] * 4
        v[C] += w["sure"]
        v[A] += w["unsure"]
        top = max(v)
        expected[name] = min(c for c in range(4) if v[c] == top)
    assert expected == {"none": A, "alpha": C}
    for flag in ("none", "alpha"):
        vs = aggregate_votes(pm, meta, WeightingScheme.from_flag(flag))
        assert ensemble_decision(vs, 1) == expected[flag]


# --- properties ------------------------------------------------------------------


@st.composite
def bundles(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    m = draw(st.integers(1, 12))
    n = draw(st.integers(1, 15))
    k = draw(st.sampled_from([2, 3, 4, 6]))
    noise = draw(st.floats(0, 1))
    return generate(SynthSpec(seed=seed, m=m, n=n, k=k, noise=noise, test_per_class=draw(st.integers(1, 20))))


@settings(max_examples=60, deadline=None)
@given(b=bundles(), flag=st.sampled_from(["none", "alpha", "alpha2", "alpha3", "acc", "acc2", "f1"]))
def test_conservation(b, flag):
    scheme = WeightingScheme.from_flag(flag)
    vs = aggregate_votes(b.predictions, b.meta, scheme)
    w = weight_matrix(b.ordered_meta(), scheme)
    for t in range(b.predictions.n_steps):
        applied = sum(w[i, b.predictions.cells[i, t]] for i in range(b.predictions.m))
        assert abs(vs.values[:, t].sum() - applied) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(b=bundles(), lam=st.sampled_from([0.1, 3.0, 1e6, 0.37]))
def test_scale_invariance(b, lam):
    scheme = WeightingScheme.from_flag("alpha2")
    w = weight_matrix(b.ordered_meta(), scheme)
    base = tally(b.predictions, w)
    scaled = tally(b.predictions, w * lam)
    assert ensemble_decisions(base) == ensemble_decisions(scaled)


@settings(max_examples=40, deadline=None)
@given(b=bundles())
def test_binary_accuracy_makes_powers_identical(b):
    k = len(b.mood_set)
    rng = np.random.default_rng(len(b.meta))
    meta = []
    for mm in b.meta:
        diag = rng.integers(0, 2, size=k) * 5
        # each column either has only its diagonal entry (alpha 1) or none (alpha 0)
        cm = tuple(tuple(int(diag[i]) if i == j else 0 for j in range(k)) for i in range(k))
        meta.append(ModelMeta(mm.model_id, mm.method, mm.interval_length, mm.overall_accuracy, cm))
    series = [aggregate_votes(b.predictions, meta, WeightingScheme("class_accuracy", p)).values for p in (1, 2, 3)]
    assert np.array_equal(series[0], series[1]) and np.array_equal(series[1], series[2])
