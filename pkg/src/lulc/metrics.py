"""Confusion matrices and per-class / macro accuracy, precision and recall (percent)."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # rows = true class, cols = predicted

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ClassScores:
    accuracy: float
    precision: float
    recall: float
    # names of metrics whose denominator was zero (reported as 0)
    undefined: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvalReport:
    class_names: list[str]
    per_class: list[ClassScores]
    overall: ClassScores
    confusion: ConfusionMatrix


def confusion(true_labels: Sequence[int], predicted: Sequence[int], n_classes: int) -> ConfusionMatrix:
    t = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(predicted, dtype=np.int64)
    if t.shape != p.shape:
        raise ValueError(f"{t.size} true labels but {p.size} predictions")
    for name, arr in (("true", t), ("predicted", p)):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise ValueError(f"{name} label outside 0..{n_classes - 1}")
    counts = np.bincount(t * n_classes + p, minlength=n_classes * n_classes)
    return ConfusionMatrix(counts.reshape(n_classes, n_classes))


def one_vs_rest(cm: ConfusionMatrix, c: int) -> tuple[int, int, int, int]:
    """(TP, TN, FP, FN) of class ``c`` against all others."""
    k = cm.counts
    tp = int(k[c, c])
    fp = int(k[:, c].sum()) - tp
    fn = int(k[c, :].sum()) - tp
    tn = cm.total - tp - fp - fn
    return tp, tn, fp, fn


def scores(tp: int, tn: int, fp: int, fn: int) -> ClassScores:
    """Accuracy, recall and precision in percent; a zero denominator yields 0 and a flag."""
    if min(tp, tn, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    total = tp + tn + fp + fn
    if total == 0:
        raise ValueError("all counts are zero")
    undefined = []
    accuracy = 100.0 * (tp + tn) / total
    if tp + fn:
        recall = 100.0 * tp / (tp + fn)
    else:
        recall = 0.0
        undefined.append("recall")
    if tp + fp:
        precision = 100.0 * tp / (tp + fp)
    else:
        precision = 0.0
        undefined.append("precision")
    return ClassScores(accuracy, precision, recall, tuple(undefined))


def report(
    true_labels: Sequence[int],
    predicted: Sequence[int],
    n_classes: int,
    class_names: Sequence[str] | None = None,
    average: str = "macro",
) -> EvalReport:
    """Per-class one-vs-rest scores plus an ``overall`` row.

    ``average="macro"`` is the unweighted mean of the per-class values;
    ``"micro"`` pools the one-vs-rest counts of all classes first.
    """
    names = list(class_names) if class_names is not None else [str(c) for c in range(n_classes)]
    if len(names) != n_classes:
        raise ValueError(f"{len(names)} class names for {n_classes} classes")
    cm = confusion(true_labels, predicted, n_classes)
    counts = [one_vs_rest(cm, c) for c in range(n_classes)]
    per_class = [scores(*cnt) for cnt in counts]
    if average == "macro":
        overall = ClassScores(
            float(np.mean([s.accuracy for s in per_class])),
            float(np.mean([s.precision for s in per_class])),
            float(np.mean([s.recall for s in per_class])),
            tuple(sorted({u for s in per_class for u in s.undefined})),
        )
    elif average == "micro":
        overall = scores(*(int(sum(col)) for col in zip(*counts)))
    else:
        raise ValueError(f"unknown average {average!r}")
    return EvalReport(names, per_class, overall, cm)


def save_report_csv(rep: EvalReport, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "accuracy", "precision", "recall", "undefined_flags"])
        rows = list(zip(rep.class_names, rep.per_class)) + [("overall", rep.overall)]
        for name, s in rows:
            w.writerow([name, repr(s.accuracy), repr(s.precision), repr(s.recall), ";".join(s.undefined)])


def save_confusion_csv(rep: EvalReport, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["", *rep.class_names])
        for name, row in zip(rep.class_names, rep.confusion.counts.tolist()):
            w.writerow([name, *row])
