"""Binary classification metrics and correlation diagnostics."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import DataError


class MetricError(DataError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricSet:
    auc: float
    precision: float
    recall: float
    f1: float

    def as_dict(self) -> dict:
        return asdict(self)


def auc(scores_pos: Sequence[float], scores_neg: Sequence[float]) -> float:
    """Probability that a positive outscores a negative, ties counting one half.

    Computed from the rank sum of the positives (Mann-Whitney U).
    """
    pos = np.asarray(scores_pos, dtype=np.float64).ravel()
    neg = np.asarray(scores_neg, dtype=np.float64).ravel()
    if not len(pos) or not len(neg):
        raise MetricError("AUC needs at least one positive and one negative score")
    ranks = rankdata(np.concatenate([pos, neg]))
    u = ranks[:len(pos)].sum() - len(pos) * (len(pos) + 1) / 2.0
    return float(u / (len(pos) * len(neg)))


def auc_from_labels(scores, labels) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise MetricError("scores and labels differ in shape")
    return auc(scores[labels == 1], scores[labels == 0])


def precision_recall_f1(c: ConfusionCounts) -> tuple[float, float, float]:
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def confusion(probabilities, labels, threshold: float = 0.5) -> ConfusionCounts:
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(labels)
    if p.shape != y.shape:
        raise MetricError("probabilities and labels differ in shape")
    if not 0.0 < threshold < 1.0:
        raise MetricError("threshold must lie in (0, 1)")
    pred = p >= threshold
    pos = y == 1
    return ConfusionCounts(tp=int((pred & pos).sum()), fp=int((pred & ~pos).sum()),
                           tn=int((~pred & ~pos).sum()), fn=int((~pred & pos).sum()))


def threshold_metrics(probabilities, labels, threshold: float = 0.5) -> tuple[ConfusionCounts, MetricSet]:
    """Confusion counts plus AUC/precision/recall/F1 at ``threshold``.

    A sample is predicted positive iff its probability is ``>= threshold``;
    precision is 0 when nothing is predicted positive.  AUC is NaN when one
    class is absent.
    """
    c = confusion(probabilities, labels, threshold)
    precision, recall, f1 = precision_recall_f1(c)
    y = np.asarray(labels)
    try:
        a = auc_from_labels(probabilities, y)
    except MetricError:
        a = float("nan")
    return c, MetricSet(a, precision, recall, f1)


def summarize_runs(runs: Sequence[MetricSet]) -> dict:
    """``{metric: {"mean": .., "std": ..}}`` over repeated runs (population std)."""
    out = {}
    for key in ("auc", "precision", "recall", "f1"):
        vals = np.array([getattr(r, key) for r in runs], dtype=np.float64)
        out[key] = {"mean": float(vals.mean()), "std": float(vals.std())}
    return out


def pearson_correlation_matrix(columns) -> tuple[np.ndarray, list[int]]:
    """Pairwise Pearson r between columns.

    Returns the symmetric matrix (unit diagonal) and the indices of
    zero-variance columns, whose off-diagonal entries are set to 0.
    """
    cols = [np.asarray(c, dtype=np.float64).ravel() for c in columns]
    if len(cols) < 2:
        raise MetricError("need at least two columns")
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise MetricError("columns differ in length")
    if n < 3:
        raise MetricError("need at least three observations")
    x = np.stack(cols, axis=1)
    x = x - x.mean(axis=0)
    norm = np.sqrt((x * x).sum(axis=0))
    flat = [i for i, v in enumerate(norm) if v == 0]
    safe = np.where(norm == 0, 1.0, norm)
    z = x / safe
    r = np.clip(z.T @ z, -1.0, 1.0)
    r[flat, :] = 0.0
    r[:, flat] = 0.0
    np.fill_diagonal(r, 1.0)
    return r, flat
