"""Confusion matrices, per-class precision/recall/F1, accuracy and the stratified split."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Hashable, Sequence, TypeVar

import numpy as np

from .errors import ClassTooSmall, EmptyMatrix, LengthMismatch, UnknownLabel

T = TypeVar("T")


@dataclass
class ConfusionMatrix:
    classes: tuple
    counts: np.ndarray  # rows = gold, columns = predicted

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def index(self, label) -> int:
        try:
            return self.classes.index(label)
        except ValueError:
            raise UnknownLabel(repr(label)) from None

    def transpose(self) -> "ConfusionMatrix":
        return ConfusionMatrix(self.classes, self.counts.T.copy())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.classes != other.classes:
            raise UnknownLabel("class lists differ")
        return ConfusionMatrix(self.classes, self.counts + other.counts)


def confusion(gold: Sequence, pred: Sequence, classes: Sequence) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise LengthMismatch(f"{len(gold)} gold vs {len(pred)} predicted")
    classes = tuple(classes)
    pos = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for g, p in zip(gold, pred):
        if g not in pos:
            raise UnknownLabel(repr(g))
        if p not in pos:
            raise UnknownLabel(repr(p))
        counts[pos[g], pos[p]] += 1
    return ConfusionMatrix(classes, counts)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def class_metrics(cm: ConfusionMatrix, label) -> dict[str, float]:
    k = cm.index(label)
    tp = int(cm.counts[k, k])
    fp = int(cm.counts[:, k].sum()) - tp
    fn = int(cm.counts[k, :].sum()) - tp
    p = _ratio(tp, tp + fp)
    r = _ratio(tp, tp + fn)
    f1 = _ratio(2 * p * r, p + r)
    return {"precision": p, "recall": r, "f1": f1}


def accuracy(cm: ConfusionMatrix) -> float:
    total = cm.total
    if total == 0:
        raise EmptyMatrix("no evaluated items")
    return float(np.trace(cm.counts)) / total


def stratified_split(
    dataset: Sequence[tuple[T, Hashable]], test_fraction: float, seed: int
) -> tuple[list[tuple[T, Hashable]], list[tuple[T, Hashable]]]:
    """Per-class shuffled split; each class contributes round(n_c * fraction) test items.

    Both halves keep the dataset's original order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    by_class: dict = {}
    for i, (_, label) in enumerate(dataset):
        by_class.setdefault(label, []).append(i)
    rng = np.random.default_rng(seed)
    test_idx: set[int] = set()
    for label in sorted(by_class, key=str):
        members = by_class[label]
        if len(members) < 2:
            raise ClassTooSmall(f"class {label!r} has {len(members)} item(s)")
        n_test = int(np.floor(len(members) * test_fraction + 0.5))
        n_test = min(max(n_test, 1), len(members) - 1)
        chosen = rng.permutation(len(members))[:n_test]
        test_idx.update(members[j] for j in chosen)
    train = [item for i, item in enumerate(dataset) if i not in test_idx]
    test = [item for i, item in enumerate(dataset) if i in test_idx]
    return train, test


@dataclass
class EvalReport:
    task: str
    classes: tuple[str, ...]
    per_class: dict[str, dict[str, float]]
    accuracy: float
    support: dict[str, int]
    dataset_fingerprint: str = ""
    split: dict = field(default_factory=dict)

    @classmethod
    def from_matrix(cls, task: str, cm: ConfusionMatrix, fingerprint: str = "", split: dict | None = None) -> "EvalReport":
        names = tuple(str(c) for c in cm.classes)
        per_class = {n: class_metrics(cm, c) for n, c in zip(names, cm.classes)}
        support = {n: int(cm.counts[i, :].sum()) for i, n in enumerate(names)}
        return cls(task, names, per_class, accuracy(cm), support, fingerprint, dict(split or {}))

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "classes": list(self.classes),
            "per_class": self.per_class,
            "support": self.support,
            "accuracy": self.accuracy,
            "dataset_fingerprint": self.dataset_fingerprint,
            "split": self.split,
        }


def format_reports(reports: Sequence[EvalReport]) -> str:
    """Aligned text: one block per classifier with label rows and an accuracy footer."""
    lines = []
    for r in reports:
        lines.append(r.task)
        lines.append(f"  {'Label':<12}{'Precision':>10}{'Recall':>10}{'F1':>10}{'Support':>9}")
        for c in r.classes:
            m = r.per_class[c]
            lines.append(f"  {c:<12}{m['precision']:>10.3f}{m['recall']:>10.3f}{m['f1']:>10.3f}{r.support[c]:>9}")
        lines.append(f"  {'Accuracy':<12}{r.accuracy:>10.3f}")
        lines.append("")
    if reports:
        mean = sum(r.accuracy for r in reports) / len(reports)
        lines.append(f"Unweighted mean accuracy over {len(reports)} classifiers: {mean:.3f}")
    return "\n".join(lines) + "\n"


def reports_json(reports: Sequence[EvalReport]) -> str:
    doc = {
        "classifiers": [r.to_dict() for r in reports],
        "unweighted_mean_accuracy": (sum(r.accuracy for r in reports) / len(reports)) if reports else None,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
