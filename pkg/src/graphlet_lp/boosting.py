"""Second-order gradient-boosted decision trees for binary labels.

Exact greedy split search over the distinct values of each feature, logistic
loss, L2-regularised leaf weights.  No subsampling, so training is a pure
function of its inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import DataError, TrainingError
from .metrics import auc_from_labels


@dataclass(frozen=True)
class Hyperparameters:
    max_trees: int = 200
    max_depth: int = 4
    learning_rate: float = 0.1
    l2_leaf_regularization: float = 1.0
    min_split_gain: float = 0.0
    early_stopping_rounds: int = 20

    def __post_init__(self):
        if self.max_trees < 0:
            raise ValueError("max_trees must be >= 0")
        if not 1 <= self.max_depth <= 8:
            raise ValueError("max_depth must lie in [1, 8]")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.l2_leaf_regularization < 0:
            raise ValueError("l2_leaf_regularization must be >= 0")
        if self.min_split_gain < 0:
            raise ValueError("min_split_gain must be >= 0")
        if self.early_stopping_rounds < 1:
            raise ValueError("early_stopping_rounds must be >= 1")


@dataclass(frozen=True)
class TreeNode:
    """One node; ``feature == -1`` marks a leaf."""

    feature: int
    threshold: float
    left: int
    right: int
    weight: float
    cover: float

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


class Tree:
    """Flat array form of a binary tree; node 0 is the root.

    Rows with ``value < threshold`` go left.
    """

    def __init__(self, feature, threshold, left, right, weight, cover):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.weight = np.asarray(weight, dtype=np.float64)
        self.cover = np.asarray(cover, dtype=np.float64)

    def __len__(self):
        return len(self.feature)

    def node(self, i: int) -> TreeNode:
        return TreeNode(int(self.feature[i]), float(self.threshold[i]), int(self.left[i]),
                        int(self.right[i]), float(self.weight[i]), float(self.cover[i]))

    @property
    def depth(self) -> int:
        def walk(i):
            return 0 if self.feature[i] < 0 else 1 + max(walk(self.left[i]), walk(self.right[i]))
        return walk(0)

    def leaf_index(self, X: np.ndarray) -> np.ndarray:
        idx = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        for _ in range(self.depth):
            f = self.feature[idx]
            internal = f >= 0
            go_left = X[rows, np.where(internal, f, 0)] < self.threshold[idx]
            idx = np.where(internal, np.where(go_left, self.left[idx], self.right[idx]), idx)
        return idx

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.weight[self.leaf_index(X)]

    def used_features(self) -> set[int]:
        return set(self.feature[self.feature >= 0].tolist())

    def to_dict(self, i: int = 0) -> dict:
        if self.feature[i] < 0:
            return {"leaf": float(self.weight[i]), "cover": float(self.cover[i])}
        return {"feature": int(self.feature[i]), "threshold": float(self.threshold[i]),
                "cover": float(self.cover[i]),
                "left": self.to_dict(int(self.left[i])), "right": self.to_dict(int(self.right[i]))}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        cols = {k: [] for k in ("feature", "threshold", "left", "right", "weight", "cover")}

        def add(node):
            i = len(cols["feature"])
            for k in cols:
                cols[k].append(0)
            cols["cover"][i] = node["cover"]
            if "leaf" in node:
                cols["feature"][i], cols["left"][i], cols["right"][i] = -1, -1, -1
                cols["weight"][i] = node["leaf"]
            else:
                cols["feature"][i] = node["feature"]
                cols["threshold"][i] = node["threshold"]
                cols["left"][i] = add(node["left"])
                cols["right"][i] = add(node["right"])
            return i

        add(d)
        return cls(**cols)


@dataclass
class BoostedModel:
    trees: list
    learning_rate: float
    base_score: float
    feature_names: tuple
    training_log: list = field(default_factory=list)
    best_iteration: int | None = None

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def _rows(self, rows) -> np.ndarray:
        X = np.asarray(rows, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DataError(f"rows have width {X.shape[-1]}, model expects {self.n_features}")
        return X

    def tree_outputs(self, rows) -> np.ndarray:
        """``(len(rows), len(trees))`` raw tree outputs."""
        X = self._rows(rows)
        out = np.zeros((len(X), len(self.trees)))
        for k, t in enumerate(self.trees):
            out[:, k] = t.predict(X)
        return out

    def predict_margin(self, rows, n_trees: int | None = None) -> np.ndarray:
        X = self._rows(rows)
        margin = np.full(len(X), self.base_score)
        for t in self.trees[:n_trees]:
            margin += self.learning_rate * t.predict(X)
        return margin

    def predict_proba(self, rows) -> np.ndarray:
        return expit(self.predict_margin(rows))

    def truncated(self, n_trees: int) -> "BoostedModel":
        return BoostedModel(self.trees[:n_trees], self.learning_rate, self.base_score,
                            self.feature_names, self.training_log[:n_trees], None)

    def to_json(self) -> str:
        return json.dumps({
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "feature_names": list(self.feature_names),
            "best_iteration": self.best_iteration,
            "training_log": self.training_log,
            "trees": [t.to_dict() for t in self.trees],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "BoostedModel":
        d = json.loads(text)
        return cls([Tree.from_dict(t) for t in d["trees"]], d["learning_rate"], d["base_score"],
                   tuple(d["feature_names"]), d.get("training_log", []), d.get("best_iteration"))


def predict_proba(model: BoostedModel, rows) -> np.ndarray:
    return model.predict_proba(rows)


def predict_margin(model: BoostedModel, rows) -> np.ndarray:
    return model.predict_margin(rows)


# -- training ---------------------------------------------------------------

class _Presorted:
    """Per-feature ranks into the sorted distinct values."""

    def __init__(self, X: np.ndarray):
        self.uniques = []
        self.ranks = []
        for j in range(X.shape[1]):
            u, r = np.unique(X[:, j], return_inverse=True)
            self.uniques.append(u)
            self.ranks.append(r.ravel())


def _best_split(pre: _Presorted, idx, g, h, lam, gamma):
    G, H = g[idx].sum(), h[idx].sum()
    parent = G * G / (H + lam) if H + lam > 0 else 0.0
    best = (0.0, -1, 0.0)
    for j, (u, r) in enumerate(zip(pre.uniques, pre.ranks)):
        rj = r[idx]
        present = np.bincount(rj, minlength=len(u)) > 0
        if present.sum() < 2:
            continue
        gl = np.cumsum(np.bincount(rj, weights=g[idx], minlength=len(u))[present])[:-1]
        hl = np.cumsum(np.bincount(rj, weights=h[idx], minlength=len(u))[present])[:-1]
        gr, hr = G - gl, H - hl
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent) - gamma
        gain = np.where(np.isfinite(gain), gain, -np.inf)
        k = int(np.argmax(gain))
        if gain[k] > best[0]:
            vals = u[present]
            best = (float(gain[k]), j, float((vals[k] + vals[k + 1]) / 2))
    return best


def _grow(pre, X, idx, g, h, hp: Hyperparameters, cols, depth):
    i = len(cols["feature"])
    for k in cols:
        cols[k].append(0)
    G, H = g[idx].sum(), h[idx].sum()
    cols["cover"][i] = float(H)
    lam = hp.l2_leaf_regularization
    gain, j, thr = (_best_split(pre, idx, g, h, lam, hp.min_split_gain)
                    if depth < hp.max_depth else (0.0, -1, 0.0))
    if j < 0 or gain <= 0:
        cols["feature"][i], cols["left"][i], cols["right"][i] = -1, -1, -1
        cols["weight"][i] = float(-G / (H + lam)) if H + lam > 0 else 0.0
        return i
    go_left = X[idx, j] < thr
    cols["feature"][i] = j
    cols["threshold"][i] = thr
    cols["left"][i] = _grow(pre, X, idx[go_left], g, h, hp, cols, depth + 1)
    cols["right"][i] = _grow(pre, X, idx[~go_left], g, h, hp, cols, depth + 1)
    return i


def fit_tree(X, g, h, hp: Hyperparameters, presorted: _Presorted | None = None) -> Tree:
    """One regression tree on gradients ``g`` and hessians ``h``."""
    pre = presorted or _Presorted(X)
    cols = {k: [] for k in ("feature", "threshold", "left", "right", "weight", "cover")}
    _grow(pre, X, np.arange(len(X)), g, h, hp, cols, 0)
    return Tree(**cols)


def _check_matrix(X, y, what):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).ravel()
    if X.ndim != 2 or len(X) != len(y):
        raise DataError(f"{what}: rows and labels do not line up")
    if not np.isfinite(X).all():
        raise DataError(f"{what}: non-finite feature values")
    return X, y


def train(matrix, validation=None, hp: Hyperparameters = Hyperparameters(), seed: int = 0,
          feature_names: Sequence[str] | None = None) -> BoostedModel:
    """Fit a boosted ensemble on ``matrix`` (a FeatureMatrix or ``(X, y)``).

    With a validation set, boosting stops once its AUC has not improved for
    ``early_stopping_rounds`` rounds and the ensemble is cut back to the best
    round.  ``seed`` is recorded for the manifest; training draws no random
    numbers.
    """
    del seed
    if isinstance(matrix, tuple):
        X, y = matrix
        names = tuple(feature_names) if feature_names else tuple(f"f{j}" for j in range(np.shape(X)[1]))
    else:
        X, y, names = matrix.X, matrix.labels, matrix.feature_names
    X, y = _check_matrix(X, y, "training matrix")
    if len(X) == 0:
        raise TrainingError("empty training matrix")
    if not np.isin(y, (0, 1)).all():
        raise DataError("labels must be 0 or 1")
    prior = y.mean()
    if prior in (0.0, 1.0):
        raise TrainingError("training labels contain a single class")
    base = math.log(prior / (1 - prior))

    Xv = yv = None
    if validation is not None:
        Xv, yv = validation if isinstance(validation, tuple) else (validation.X, validation.labels)
        Xv, yv = _check_matrix(Xv, yv, "validation matrix")
        if Xv.shape[1] != X.shape[1]:
            raise DataError("validation width differs from training width")
        if len(np.unique(yv)) < 2:
            Xv = yv = None

    pre = _Presorted(X)
    margin = np.full(len(X), base)
    vmargin = np.full(len(Xv), base) if Xv is not None else None
    trees, log = [], []
    best_auc, best_n, stale = -np.inf, 0, 0
    for _ in range(hp.max_trees):
        p = expit(margin)
        tree = fit_tree(X, p - y, p * (1 - p), hp, pre)
        trees.append(tree)
        margin += hp.learning_rate * tree.predict(X)
        if vmargin is None:
            continue
        vmargin += hp.learning_rate * tree.predict(Xv)
        score = auc_from_labels(vmargin, yv)
        log.append(score)
        if score > best_auc:
            best_auc, best_n, stale = score, len(trees), 0
        else:
            stale += 1
            if stale >= hp.early_stopping_rounds:
                break
    best = None
    if vmargin is not None and trees:
        trees, best = trees[:best_n], best_n
    return BoostedModel(trees, hp.learning_rate, base, names, log, best)
