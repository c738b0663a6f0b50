from __future__ import annotations

import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tweetcascade.errors import ClassTooSmall, EmptyMatrix, LengthMismatch, UnknownLabel
from tweetcascade.evaluation import (
    ConfusionMatrix, EvalReport, accuracy, class_metrics, confusion, format_reports, reports_json, stratified_split,
)

AB = ("A", "B")


def cm(rows, classes=AB):
    return ConfusionMatrix(tuple(classes), np.array(rows, dtype=np.int64))


# --- confusion -----------------------------------------------------------------

def test_confusion_identity():
    assert confusion(["A", "B"], ["A", "B"], AB).counts.tolist() == [[1, 0], [0, 1]]


def test_confusion_hand_count():
    m = confusion(["A", "A", "B"], ["A", "B", "B"], AB)
    assert m.counts.tolist() == [[1, 1], [0, 1]] and m.total == 3


def test_confusion_matches_recount_oracle():
    rng = np.random.default_rng(0)
    classes = ("x", "y", "z")
    gold = [classes[i] for i in rng.integers(0, 3, 1000)]
    pred = [classes[i] for i in rng.integers(0, 3, 1000)]
    pairs = Counter(zip(gold, pred))
    m = confusion(gold, pred, classes)
    for i, g in enumerate(classes):
        for j, p in enumerate(classes):
            assert m.counts[i, j] == pairs[(g, p)]
    assert m.total == 1000


def test_confusion_errors():
    with pytest.raises(LengthMismatch):
        confusion(["A"], [], AB)
    with pytest.raises(UnknownLabel):
        confusion(["A"], ["C"], AB)
    with pytest.raises(UnknownLabel):
        class_metrics(cm([[1, 0], [0, 1]]), "C")


# --- metrics -------------------------------------------------------------------

def test_symmetric_fixture_is_point_nine():
    m = cm([[9, 1], [1, 9]])
    assert class_metrics(m, "A") == {"precision": 0.9, "recall": 0.9, "f1": 0.9}
    assert accuracy(m) == 0.9


def test_perfect_matrix():
    m = cm([[7, 0], [0, 3]])
    assert class_metrics(m, "A") == {"precision": 1.0, "recall": 1.0, "f1": 1.0}
    assert accuracy(m) == 1.0


def test_never_predicted_class_scores_zero():
    m = cm([[0, 4], [0, 6]])
    assert class_metrics(m, "A") == {"precision": 0.0, "recall": 0.0, "f1": 0.0}


def test_all_wrong_and_empty():
    assert accuracy(cm([[0, 5], [5, 0]])) == 0.0
    with pytest.raises(EmptyMatrix):
        accuracy(cm([[0, 0], [0, 0]]))


_matrices = st.integers(2, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 50), min_size=n, max_size=n), min_size=n, max_size=n))


@settings(max_examples=200)
@given(_matrices)
def test_micro_accuracy_is_weighted_recall(rows):
    m = cm(rows, [f"c{i}" for i in range(len(rows))])
    if m.total == 0:
        return
    weighted = sum(m.counts[i].sum() / m.total * class_metrics(m, c)["recall"] for i, c in enumerate(m.classes))
    assert accuracy(m) == pytest.approx(weighted, abs=1e-12)
    for c in m.classes:
        met = class_metrics(m, c)
        assert all(0.0 <= v <= 1.0 for v in met.values())
        p, r = met["precision"], met["recall"]
        assert met["f1"] == (pytest.approx(2 * p * r / (p + r)) if p + r else 0.0)


@settings(max_examples=100)
@given(_matrices)
def test_transpose_swaps_precision_and_recall(rows):
    m = cm(rows, [f"c{i}" for i in range(len(rows))])
    t = m.transpose()
    for c in m.classes:
        a, b = class_metrics(m, c), class_metrics(t, c)
        assert a["precision"] == pytest.approx(b["recall"]) and a["recall"] == pytest.approx(b["precision"])


@settings(max_examples=100)
@given(st.lists(st.tuples(st.sampled_from(AB), st.sampled_from(AB)), min_size=1, max_size=40), st.randoms())
def test_permutation_invariance(pairs, rnd):
    shuffled = pairs[:]
    rnd.shuffle(shuffled)
    a = confusion([g for g, _ in pairs], [p for _, p in pairs], AB)
    b = confusion([g for g, _ in shuffled], [p for _, p in shuffled], AB)
    assert np.array_equal(a.counts, b.counts)
    assert EvalReport.from_matrix("t", a).to_dict() == EvalReport.from_matrix("t", b).to_dict()


# --- split ---------------------------------------------------------------------

def _dataset(n_a, n_b):
    return [(i, "A") for i in range(n_a)] + [(n_a + i, "B") for i in range(n_b)]


def test_balanced_split_proportions():
    train, test = stratified_split(_dataset(50, 50), 0.2, seed=1)
    assert Counter(l for _, l in test) == {"A": 10, "B": 10}
    assert len(train) == 80


def test_imbalanced_split_proportions():
    _, test = stratified_split(_dataset(90, 10), 0.2, seed=1)
    assert Counter(l for _, l in test) == {"A": 18, "B": 2}


def test_split_is_deterministic_partition():
    data = _dataset(37, 23)
    a = stratified_split(data, 0.2, seed=9)
    assert a == stratified_split(data, 0.2, seed=9)
    train, test = a
    assert sorted(train + test) == sorted(data) and not set(train) & set(test)
    assert a != stratified_split(data, 0.2, seed=10)


def test_split_errors():
    with pytest.raises(ClassTooSmall):
        stratified_split(_dataset(10, 1), 0.2, seed=0)
    with pytest.raises(ValueError):
        stratified_split(_dataset(10, 10), 1.0, seed=0)


@settings(max_examples=100)
@given(st.integers(2, 60), st.integers(2, 60), st.floats(0.05, 0.95), st.integers(0, 1000))
def test_split_preserves_proportions_within_one(n_a, n_b, frac, seed):
    train, test = stratified_split(_dataset(n_a, n_b), frac, seed)
    counts = Counter(l for _, l in test)
    for label, n in (("A", n_a), ("B", n_b)):
        assert abs(counts[label] - n * frac) <= 1
        assert 1 <= counts[label] <= n - 1
    assert len(train) + len(test) == n_a + n_b


# --- report --------------------------------------------------------------------

def test_report_text_and_json():
    reports = [EvalReport.from_matrix("Relevance Classifier (EN)", cm([[9, 1], [1, 9]], ("Yes", "No")), "abc",
                                      {"test_fraction": 0.2, "seed": 0}),
               EvalReport.from_matrix("Typeface Classifier", cm([[5, 0], [0, 5]], ("Simplified", "Traditional")))]
    text = format_reports(reports)
    lines = text.splitlines()
    assert lines[0] == "Relevance Classifier (EN)"
    assert lines[1].split() == ["Label", "Precision", "Recall", "F1", "Support"]
    assert lines[2].split() == ["Yes", "0.900", "0.900", "0.900", "10"]
    assert lines[4].split() == ["Accuracy", "0.900"]
    assert lines[-1] == "Unweighted mean accuracy over 2 classifiers: 0.950"
    doc = json.loads(reports_json(reports))
    assert doc["unweighted_mean_accuracy"] == pytest.approx(0.95)
    assert doc["classifiers"][0]["dataset_fingerprint"] == "abc"
    assert doc["classifiers"][0]["split"] == {"test_fraction": 0.2, "seed": 0}
    assert doc["classifiers"][1]["per_class"]["Traditional"]["f1"] == 1.0
