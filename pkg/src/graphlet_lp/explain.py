"""Exact interventional Shapley values for boosted tree ensembles.

For one explained row ``x`` and one background row ``z``, a leaf reached
by a hybrid of the two depends only on which path features must come from
``x`` (set A: ``x`` satisfies the feature's interval on the path, ``z``
does not) and which must come from ``z`` (set B).  The leaf's game is then
``v * [A in S] * [B disjoint from S]`` whose Shapley values have a closed
form, so every (row, background row) pair costs O(path length) per leaf.
Values are averaged over the background and reported on the margin scale.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .atlas import CATEGORY_NAMES, DEFAULT_ATLAS, OrbitAtlas
from .boosting import BoostedModel, Tree
from .errors import ConfigurationError, ValidationError

MAX_EXHAUSTIVE_FEATURES = 12
DEFAULT_BACKGROUND = 100
_CHUNK = 256


@dataclass
class ShapReport:
    per_sample: np.ndarray
    base_value: float
    feature_names: tuple
    background_size: int
    margins: np.ndarray = field(default=None)

    @property
    def mean_abs(self) -> np.ndarray:
        return np.abs(self.per_sample).mean(axis=0)

    @property
    def mean_signed(self) -> np.ndarray:
        return self.per_sample.mean(axis=0)

    def local_accuracy_gap(self) -> float:
        """Largest ``|base + sum(phi) - margin|`` over the explained rows."""
        if self.margins is None or not len(self.per_sample):
            return 0.0
        return float(np.max(np.abs(self.base_value + self.per_sample.sum(axis=1) - self.margins)))

    def to_csv(self, pairs=None, labels=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = len(self.per_sample)
        pairs = np.zeros((n, 2), np.int64) if pairs is None else np.asarray(pairs)
        labels = np.zeros(n, np.int64) if labels is None else np.asarray(labels)
        w.writerow(["x", "y", "label"] + [f"phi_{k}" for k in self.feature_names])
        for (x, y), lab, row in zip(pairs.tolist(), labels.tolist(), self.per_sample.tolist()):
            w.writerow([x, y, lab] + [repr(v) for v in row])
        return buf.getvalue()


def _leaf_paths(tree: Tree):
    """``(leaf value, {feature: (lo, hi)})`` for every leaf."""
    out = []

    def walk(i, box):
        f = int(tree.feature[i])
        if f < 0:
            out.append((float(tree.weight[i]), dict(box)))
            return
        thr = float(tree.threshold[i])
        lo, hi = box.get(f, (-np.inf, np.inf))
        walk(int(tree.left[i]), {**box, f: (lo, min(hi, thr))})
        walk(int(tree.right[i]), {**box, f: (max(lo, thr), hi)})

    walk(0, {})
    return out


def _leaf_tables(model: BoostedModel):
    leaves = []
    for t in model.trees:
        for v, box in _leaf_paths(t):
            feats = np.array(sorted(box), dtype=np.int64)
            lo = np.array([box[f][0] for f in feats.tolist()])
            hi = np.array([box[f][1] for f in feats.tolist()])
            leaves.append((model.learning_rate * v, feats, lo, hi))
    return leaves


def _weights(depth: int):
    """``wa[a, b] = (a-1)! b! / (a+b)!`` and ``wb[a, b] = a! (b-1)! / (a+b)!``."""
    fact = [math.factorial(k) for k in range(2 * depth + 2)]
    wa = np.zeros((depth + 1, depth + 1))
    wb = np.zeros((depth + 1, depth + 1))
    for a in range(depth + 1):
        for b in range(depth + 1):
            if a:
                wa[a, b] = fact[a - 1] * fact[b] / fact[a + b]
            if b:
                wb[a, b] = fact[a] * fact[b - 1] / fact[a + b]
    return wa, wb


def tree_shap(model: BoostedModel, rows, background) -> ShapReport:
    """Interventional Shapley values of ``model``'s margin for each row."""
    X = model._rows(rows)
    Z = model._rows(background)
    if not len(Z):
        raise ConfigurationError("SHAP background is empty")
    d = model.n_features
    phi = np.zeros((len(X), d))
    leaves = _leaf_tables(model)
    depth = max((len(f) for _, f, _, _ in leaves), default=0)
    wa, wb = _weights(depth)
    zin = [((Z[:, f] >= lo) & (Z[:, f] < hi)) for _, f, lo, hi in leaves]
    for start in range(0, len(X), _CHUNK):
        xs = X[start:start + _CHUNK]
        acc = np.zeros((len(xs), d))
        for (v, feats, lo, hi), zo in zip(leaves, zin):
            if not len(feats):
                continue
            xo = (xs[:, feats] >= lo) & (xs[:, feats] < hi)          # (s, p)
            only_x = xo[:, None, :] & ~zo[None, :, :]                 # (s, b, p)
            only_z = ~xo[:, None, :] & zo[None, :, :]
            alive = ~(~xo[:, None, :] & ~zo[None, :, :]).any(axis=2)  # (s, b)
            a = only_x.sum(axis=2)
            b = only_z.sum(axis=2)
            ga = np.where(alive, wa[a, b], 0.0) * v
            gb = np.where(alive, wb[a, b], 0.0) * v
            contrib = (only_x * ga[:, :, None] - only_z * gb[:, :, None]).sum(axis=1)
            acc[:, feats] += contrib
        phi[start:start + len(xs)] = acc / len(Z)
    base = float(model.predict_margin(Z).mean())
    return ShapReport(phi, base, tuple(model.feature_names), len(Z), model.predict_margin(X))


def exhaustive_shapley(model: BoostedModel, row, background) -> np.ndarray:
    """Shapley values by enumerating every coalition (at most 12 features).

    The value of coalition S is the model margin averaged over background
    rows with the features outside S taken from the background.
    """
    x = model._rows(row)[0]
    Z = model._rows(background)
    if not len(Z):
        raise ConfigurationError("SHAP background is empty")
    d = model.n_features
    if d > MAX_EXHAUSTIVE_FEATURES:
        raise ConfigurationError(f"exhaustive Shapley refuses {d} > {MAX_EXHAUSTIVE_FEATURES} features")
    masks = np.array(list(itertools.product((False, True), repeat=d)), dtype=bool).reshape(-1, d)
    hybrid = np.where(masks[:, None, :], x[None, None, :], Z[None, :, :])
    value = model.predict_margin(hybrid.reshape(-1, d)).reshape(len(masks), len(Z)).mean(axis=1)
    code = {tuple(m): k for k, m in enumerate(masks.tolist())}
    fact = [math.factorial(k) for k in range(d + 1)]
    phi = np.zeros(d)
    for k, m in enumerate(masks.tolist()):
        s = sum(m)
        for i in range(d):
            if m[i]:
                continue
            with_i = list(m)
            with_i[i] = True
            phi[i] += fact[s] * fact[d - s - 1] / fact[d] * (value[code[tuple(with_i)]] - value[k])
    return phi


def sample_background(X, size: int = DEFAULT_BACKGROUND, seed: int = 0) -> np.ndarray:
    """Up to ``size`` rows of ``X`` drawn without replacement, in row order."""
    X = np.asarray(X)
    if len(X) <= size:
        return X.copy()
    pick = np.sort(np.random.default_rng(seed).choice(len(X), size=size, replace=False))
    return X[pick]


# -- aggregation -------------------------------------------------------------

@dataclass
class ImportanceSummary:
    base_value: float
    ranking: list            # [(feature, mean_abs, mean_signed)] by decreasing mean_abs
    category_shares: dict
    feature_names: tuple
    mean_abs: np.ndarray
    mean_signed: np.ndarray

    @property
    def top_feature(self) -> str:
        return self.ranking[0][0]

    def top(self, k: int = 10, atlas: OrbitAtlas = DEFAULT_ATLAS) -> list[dict]:
        return [{"rank": r + 1, "feature": f, "category": atlas.category_of(f),
                 "mean_abs": a, "mean_signed": s, "direction": "positive" if s >= 0 else "negative"}
                for r, (f, a, s) in enumerate(self.ranking[:k])]

    def to_json(self, atlas: OrbitAtlas = DEFAULT_ATLAS, top_k: int = 10) -> str:
        return json.dumps({
            "base_value": self.base_value,
            "mean_abs": dict(zip(self.feature_names, self.mean_abs.tolist())),
            "mean_signed": dict(zip(self.feature_names, self.mean_signed.tolist())),
            "category_shares": self.category_shares,
            "top": self.top(top_k, atlas),
        }, indent=1)


def aggregate_importance(report: ShapReport, atlas: OrbitAtlas = DEFAULT_ATLAS) -> ImportanceSummary:
    """Rank features by mean |phi| and split the total into order categories.

    Ties in the ranking go to the feature listed first.  When every
    mean |phi| is zero the shares fall back to category sizes.
    """
    names = tuple(report.feature_names)
    try:
        cats = [atlas.category_of(f) for f in names]
    except KeyError as exc:
        raise ConfigurationError(str(exc)) from None
    mean_abs, mean_signed = report.mean_abs, report.mean_signed
    order = sorted(range(len(names)), key=lambda i: (-mean_abs[i], i))
    ranking = [(names[i], float(mean_abs[i]), float(mean_signed[i])) for i in order]
    weight = mean_abs if mean_abs.sum() > 0 else np.ones(len(names))
    total = weight.sum()
    shares = {c: 0.0 for c in CATEGORY_NAMES}
    for c, w in zip(cats, weight):
        shares[c] += float(w)
    shares = {c: float(v / total) for c, v in shares.items()}
    return ImportanceSummary(report.base_value, ranking, shares, names, mean_abs, mean_signed)


def audit_local_accuracy(report: ShapReport, tol: float = 1e-6) -> None:
    gap = report.local_accuracy_gap()
    if gap > tol:
        raise ValidationError(f"SHAP local accuracy off by {gap:.3g} (tolerance {tol:g})")


def dependence_rows(report: ShapReport, X, features: Sequence[str] | None = None) -> list[tuple]:
    """Long-format ``(feature, value, phi)`` triples for dependence plots."""
    X = np.asarray(X)
    names = list(report.feature_names)
    out = []
    for f in features or names:
        j = names.index(f)
        out.extend((f, float(v), float(p)) for v, p in zip(X[:, j], report.per_sample[:, j]))
    return out
