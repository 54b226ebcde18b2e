"""Interpolation identities, tuning folds, accuracy reporting."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xltag.combine import (
    combined_tag,
    evaluate,
    interpolate,
    mu_grid,
    tune_mu,
)
from xltag.corpus import TaggedSentence, TagSet
from xltag.errors import DataError


def one_hot(i, k=4):
    v = np.zeros(k)
    v[i] = 1.0
    return v


def uniform(k=4):
    return np.full(k, 1.0 / k)


def test_boundaries_are_exact():
    p1 = np.array([0.7, 0.2, 0.1])
    p2 = np.array([0.1, 0.1, 0.8])
    assert np.array_equal(interpolate(p1, p2, 1.0), p1)
    assert np.array_equal(interpolate(p1, p2, 0.0), p2)


def test_midpoint():
    out = interpolate(np.array([1.0, 0.0]), np.array([0.0, 1.0]), 0.5)
    assert np.array_equal(out, np.array([0.5, 0.5]))


def test_dimension_mismatch_rejected():
    with pytest.raises(DataError):
        interpolate(np.zeros(3), np.zeros(4), 0.5)
    with pytest.raises(DataError):
        interpolate(np.zeros(3), np.zeros(3), 1.5)


probs = st.lists(
    st.floats(min_value=1e-6, max_value=1.0), min_size=2, max_size=6
).map(lambda xs: np.array(xs) / sum(xs))


@given(probs, probs, st.floats(0.0, 1.0))
def test_convexity(p1, p2, mu):
    if len(p1) != len(p2):
        p2 = np.resize(p2, len(p1))
        p2 = p2 / p2.sum()
    out = interpolate(p1, p2, mu)
    assert np.all(out >= 0)
    assert out.sum() == pytest.approx(1.0, abs=1e-9)


def test_shared_argmax_survives_any_mu():
    p1 = np.array([0.6, 0.3, 0.1])
    p2 = np.array([0.5, 0.1, 0.4])
    for mu in mu_grid(0.05):
        assert combined_tag([p1], [p2], mu) == [0]


def test_mu_boundaries_reproduce_single_systems():
    rng = np.random.default_rng(0)
    d1 = [rng.dirichlet(np.ones(4)) for _ in range(20)]
    d2 = [rng.dirichlet(np.ones(4)) for _ in range(20)]
    assert combined_tag(d1, d2, 1.0) == [int(np.argmax(p)) for p in d1]
    assert combined_tag(d1, d2, 0.0) == [int(np.argmax(p)) for p in d2]


def test_disagreeing_one_hots():
    assert combined_tag([one_hot(1)], [one_hot(2)], 0.6) == [1]
    assert combined_tag([one_hot(1)], [one_hot(2)], 0.4) == [2]


def test_tie_breaks_to_lowest_index():
    assert combined_tag([one_hot(2)], [one_hot(1)], 0.5) == [1]
    assert combined_tag([uniform()], [uniform()], 0.3) == [0]


def test_length_mismatch_rejected():
    with pytest.raises(DataError):
        combined_tag([one_hot(0)], [one_hot(0), one_hot(1)], 0.5)


def test_mu_grid_contains_bounds():
    grid = mu_grid(0.05)
    assert grid[0] == 0.0 and grid[-1] == 1.0
    assert len(grid) == 21


@pytest.fixture
def tagset4():
    return TagSet("four", ("T0", "T1", "T2", "T3"))


def complementary_systems(tagset, n_sentences=40, seed=3):
    """System 1 is perfect on tags {0,1} and uniform elsewhere; system 2
    is the reverse, so interpolation at any interior mu is perfect."""
    rng = np.random.default_rng(seed)
    gold, d1, d2 = [], [], []
    for _ in range(n_sentences):
        n = int(rng.integers(3, 7))
        tags = tuple(int(t) for t in rng.integers(0, 4, size=n))
        gold.append(TaggedSentence(tuple(f"w{t}" for t in tags), tags))
        s1, s2 = [], []
        for t in tags:
            if t in (0, 1):
                s1.append(one_hot(t))
                s2.append(uniform())
            else:
                s1.append(uniform())
                s2.append(one_hot(t))
        d1.append(s1)
        d2.append(s2)
    return gold, d1, d2


def system_accuracy(gold, dists):
    correct = total = 0
    for sent, d in zip(gold, dists):
        pred = [int(np.argmax(p)) for p in d]
        correct += sum(int(g == p) for g, p in zip(sent.tags, pred))
        total += len(pred)
    return correct / total


def test_complementary_systems_beat_either_alone(tagset4):
    gold, d1, d2 = complementary_systems(tagset4)
    mus, report = tune_mu(gold, d1, d2, grid_step=0.05, tagset=tagset4)
    single_best = max(system_accuracy(gold, d1), system_accuracy(gold, d2))
    assert report.accuracy_all >= single_best
    assert report.accuracy_all == 1.0
    assert 0.0 < mus[0] < 1.0 and 0.0 < mus[1] < 1.0
    assert report.mu_per_fold == mus


def test_dominant_second_system_selects_mu_zero(tagset4):
    rng = np.random.default_rng(5)
    gold, d1, d2 = [], [], []
    for _ in range(10):
        tags = tuple(int(t) for t in rng.integers(0, 4, size=5))
        gold.append(TaggedSentence(tuple("abcde"), tags))
        d1.append([uniform() for _ in tags])  # chance
        d2.append([one_hot(t) for t in tags])  # perfect
    mus, report = tune_mu(gold, d1, d2, tagset=tagset4)
    assert mus == (0.0, 0.0)
    assert report.accuracy_all == 1.0


def test_identical_systems_accuracy_independent_of_mu(tagset4):
    rng = np.random.default_rng(6)
    gold, dists = [], []
    for _ in range(8):
        tags = tuple(int(t) for t in rng.integers(0, 4, size=4))
        gold.append(TaggedSentence(tuple("wxyz"), tags))
        dists.append([rng.dirichlet(np.ones(4)) for _ in tags])
    accs = set()
    for mu in mu_grid(0.25):
        preds = [combined_tag(d, d, mu) for d in dists]
        report = evaluate(gold, preds, tagset4)
        accs.add(report.accuracy_all)
    assert len(accs) == 1


def test_tune_mu_requires_two_sentences(tagset4):
    gold = [TaggedSentence(("a",), (0,))]
    with pytest.raises(DataError):
        tune_mu(gold, [[one_hot(0)]], [[one_hot(0)]], tagset=tagset4)


def test_evaluate_perfect_predictions(tagset4):
    gold = [TaggedSentence(("a", "b"), (0, 1))]
    report = evaluate(gold, [(0, 1)], tagset4, [[True, False]])
    assert report.accuracy_all == 1.0
    assert report.accuracy_oov == 1.0
    assert report.oov_tokens == 1


def test_evaluate_three_of_four(tagset4):
    gold = [TaggedSentence(("a", "b", "c", "d"), (0, 1, 2, 3))]
    report = evaluate(gold, [(0, 1, 2, 0)], tagset4)
    assert report.accuracy_all == 0.75
    assert report.confusion[3, 0] == 1
    assert report.confusion[2, 2] == 1


def test_evaluate_no_oov_reports_absent(tagset4):
    gold = [TaggedSentence(("a",), (2,))]
    report = evaluate(gold, [(2,)], tagset4, [[False]])
    assert report.accuracy_oov is None
    assert "accuracy_oov" not in "\n".join(report.kv_lines())
    assert "n/a" in report.to_text()


def test_evaluate_gold_vs_gold_is_one(tagset4):
    rng = np.random.default_rng(8)
    gold = [
        TaggedSentence(
            tuple(f"t{i}" for i in range(4)),
            tuple(int(t) for t in rng.integers(0, 4, size=4)),
        )
        for _ in range(5)
    ]
    report = evaluate(gold, [s.tags for s in gold], tagset4)
    assert report.accuracy_all == 1.0


def test_evaluate_length_mismatch(tagset4):
    gold = [TaggedSentence(("a", "b"), (0, 1))]
    with pytest.raises(DataError):
        evaluate(gold, [(0,)], tagset4)


def test_report_files(tmp_path, tagset4):
    gold, d1, d2 = complementary_systems(tagset4, n_sentences=6)
    _, report = tune_mu(gold, d1, d2, tagset=tagset4)
    text = tmp_path / "report.txt"
    kv = tmp_path / "report.kv"
    report.write(text, kv)
    kv_content = kv.read_text()
    assert "accuracy_all=" in kv_content
    assert "mu_fold0=" in kv_content and "mu_fold1=" in kv_content
    assert "OOV = token whose occurrence vector is empty" in text.read_text()
