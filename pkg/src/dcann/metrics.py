"""Confusion-matrix scores and mean class probabilities.

Label 1 is the positive (True) class. Undefined ratios (zero denominators)
are reported as ``None``, never as 0.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

SCORE_FIELDS = ("accuracy", "precision", "recall", "f1", "mean_prob_actual", "mean_prob_predicted")


@dataclass(frozen=True)
class ConfusionMatrix:
    tn: int
    fp: int
    fn: int
    tp: int

    def __post_init__(self):
        if min(self.tn, self.fp, self.fn, self.tp) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    def swapped(self) -> "ConfusionMatrix":
        """Same predictions with the positive class taken to be label 0."""
        return ConfusionMatrix(tn=self.tp, fp=self.fn, fn=self.fp, tp=self.tn)


@dataclass(frozen=True)
class ScoreSet:
    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None
    mean_prob_actual: float | None
    mean_prob_predicted: float | None

    def as_dict(self) -> dict:
        return asdict(self)


def _binary(v, name: str) -> np.ndarray:
    a = np.asarray(v)
    if a.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if not np.isin(a, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return a.astype(np.int64)


def confusion(truth, predicted) -> ConfusionMatrix:
    t = _binary(truth, "truth")
    p = _binary(predicted, "predicted")
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.shape[0]} truths vs {p.shape[0]} predictions")
    if t.size == 0:
        raise ValueError("cannot build a confusion matrix from no observations")
    return ConfusionMatrix(
        tn=int(np.sum((t == 0) & (p == 0))),
        fp=int(np.sum((t == 0) & (p == 1))),
        fn=int(np.sum((t == 1) & (p == 0))),
        tp=int(np.sum((t == 1) & (p == 1))),
    )


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def scores(cm: ConfusionMatrix, probs_actual=None, probs_predicted=None) -> ScoreSet:
    """Accuracy, precision, recall, F1 and the two mean probabilities.

    ``probs_actual[i]`` is the model probability of observation i's true
    class, ``probs_predicted[i]`` the probability of the class it predicted.
    """
    if cm.total <= 0:
        raise ValueError("confusion matrix is empty")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * recall * precision / (recall + precision)

    def _mean(v):
        if v is None:
            return None
        a = np.asarray(v, dtype=float)
        if a.size == 0:
            raise ValueError("probability vector is empty")
        return float(a.mean())

    return ScoreSet(
        accuracy=(cm.tn + cm.tp) / cm.total,
        precision=precision,
        recall=recall,
        f1=f1,
        mean_prob_actual=_mean(probs_actual),
        mean_prob_predicted=_mean(probs_predicted),
    )


def evaluate(truth, proba) -> tuple[ConfusionMatrix, ScoreSet]:
    """Score an (n, 2) probability matrix against binary ground truth (argmax, ties to 0)."""
    P = np.asarray(proba, dtype=float)
    t = _binary(truth, "truth")
    if P.ndim != 2 or P.shape[0] != t.shape[0]:
        raise ValueError("proba must have one row per observation")
    predicted = np.argmax(P, axis=1)
    rows = np.arange(len(t))
    cm = confusion(t, predicted)
    return cm, scores(cm, P[rows, t], P[rows, predicted])
