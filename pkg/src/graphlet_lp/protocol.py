"""Edge splits, negative sampling and feature-matrix assembly.

A run sees three graphs: the train graph (train edges only) scores the
training and validation matrices, and the train+validation graph scores the
test matrix.  All three live on the full node set so node ids never shift.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .atlas import FEATURE_NAMES
from .errors import DataError, ProtocolError, ValidationError
from .graph import Graph, with_edges
from .orbits import edge_orbit_table, pair_node_products

MIN_EDGES = 10
_PAIR_FIELDS = ("train_edges", "validation_edges", "test_edges",
                "negative_train", "negative_validation", "negative_test")


def _pairs(a) -> np.ndarray:
    return np.asarray(a, dtype=np.int64).reshape(-1, 2)


def _canonical(p: np.ndarray) -> np.ndarray:
    """Rows as ``(min, max)``, sorted lexicographically."""
    p = _pairs(p)
    p = np.stack([p.min(axis=1), p.max(axis=1)], axis=1) if len(p) else p
    return p[np.lexsort((p[:, 1], p[:, 0]))] if len(p) else p


def _codes(p: np.ndarray, n: int) -> np.ndarray:
    p = _pairs(p)
    return np.minimum(p[:, 0], p[:, 1]) * n + np.maximum(p[:, 0], p[:, 1])


@dataclass(frozen=True)
class SplitPlan:
    seed: int
    train_edges: np.ndarray
    validation_edges: np.ndarray
    test_edges: np.ndarray
    negative_train: np.ndarray
    negative_validation: np.ndarray
    negative_test: np.ndarray

    def to_json(self) -> str:
        body = {"seed": int(self.seed)}
        body.update({k: getattr(self, k).tolist() for k in _PAIR_FIELDS})
        return json.dumps(body, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "SplitPlan":
        body = json.loads(text)
        try:
            return cls(seed=int(body["seed"]), **{k: _pairs(body[k]) for k in _PAIR_FIELDS})
        except KeyError as exc:
            raise DataError(f"split plan is missing {exc.args[0]!r}") from None

    def sizes(self) -> tuple[int, int, int]:
        return len(self.train_edges), len(self.validation_edges), len(self.test_edges)

    def train_graph(self, g: Graph) -> Graph:
        return with_edges(g, self.train_edges)

    def test_phase_graph(self, g: Graph) -> Graph:
        """Train plus validation edges; the graph test pairs are scored on."""
        return with_edges(g, np.concatenate([self.train_edges, self.validation_edges]))


def split_sizes(m: int) -> tuple[int, int, int]:
    """Train and validation sizes are 0.8m and 0.1m rounded to the nearest
    integer (halves down); test takes the rest, so every part is within one
    edge of its 8:1:1 share."""
    train, val = (8 * m + 4) // 10, (m + 4) // 10
    return train, val, m - train - val


def sample_non_edges(g: Graph, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` distinct non-adjacent pairs, uniformly without replacement.

    Rejection sampling for sparse graphs, enumeration of the complement when
    non-edges are scarce.  Output keeps draw order.
    """
    n = g.node_count
    available = n * (n - 1) // 2 - g.edge_count
    if available < count:
        raise ProtocolError(f"need {count} negative pairs but only {available} non-edges exist")
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)
    edge_codes = np.sort(_codes(g.edges(), n))

    if available <= 4 * count or n <= 64:
        iu = np.stack(np.triu_indices(n, 1), axis=1)
        iu = iu[~np.isin(_codes(iu, n), edge_codes, assume_unique=True)]
        pick = rng.choice(len(iu), size=count, replace=False)
        return iu[pick]

    chosen = np.zeros(0, dtype=np.int64)
    while len(chosen) < count:
        draw = rng.integers(0, n, size=(2 * (count - len(chosen)) + 16, 2))
        draw = draw[draw[:, 0] != draw[:, 1]]
        codes = _codes(draw, n)
        codes = codes[~np.isin(codes, edge_codes)]
        codes = np.concatenate([chosen, codes])
        _, first = np.unique(codes, return_index=True)
        chosen = codes[np.sort(first)][:count]
    return np.stack([chosen // n, chosen % n], axis=1)


def make_split(g: Graph, seed: int) -> SplitPlan:
    """Random 8:1:1 edge split plus three disjoint balanced negative sets."""
    m = g.edge_count
    if m < MIN_EDGES:
        raise ProtocolError(f"graph has {m} edges; the protocol needs at least {MIN_EDGES}")
    rng = np.random.default_rng(seed)
    edges = g.edges()
    perm = edges[rng.permutation(m)]
    a, b, _ = split_sizes(m)
    neg = sample_non_edges(g, m, rng)
    return SplitPlan(
        seed=int(seed),
        train_edges=_canonical(perm[:a]),
        validation_edges=_canonical(perm[a:a + b]),
        test_edges=_canonical(perm[a + b:]),
        negative_train=_canonical(neg[:a]),
        negative_validation=_canonical(neg[a:a + b]),
        negative_test=_canonical(neg[a + b:]),
    )


def audit_split(g: Graph, plan: SplitPlan) -> None:
    """Raise :class:`ValidationError` unless ``plan`` is a valid split of ``g``."""
    n = g.node_count
    expect = split_sizes(g.edge_count)
    if any(abs(s - e) > 1 for s, e in zip(plan.sizes(), expect)):
        raise ValidationError(f"split sizes {plan.sizes()} deviate from {expect}")
    pos = [_codes(getattr(plan, k), n) for k in _PAIR_FIELDS[:3]]
    neg = [_codes(getattr(plan, k), n) for k in _PAIR_FIELDS[3:]]
    all_pos = np.concatenate(pos)
    if len(np.unique(all_pos)) != len(all_pos) or not np.array_equal(np.sort(all_pos),
                                                                     np.sort(_codes(g.edges(), n))):
        raise ValidationError("positive splits do not partition the edge set")
    all_neg = np.concatenate(neg)
    if len(np.unique(all_neg)) != len(all_neg):
        raise ValidationError("negative sets overlap or repeat")
    if np.isin(all_neg, all_pos).any():
        raise ValidationError("a negative pair is an edge")
    for p, q, name in zip(pos, neg, ("train", "validation", "test")):
        if len(p) != len(q):
            raise ValidationError(f"{name} negatives are not balanced against positives")


# -- feature matrices -------------------------------------------------------

@dataclass
class FeatureMatrix:
    """Labelled pairs with one feature column per name.

    ``flagged`` marks rows whose pair touched a node outside the scoring
    graph; those rows hold zeros.
    """

    pairs: np.ndarray
    labels: np.ndarray
    values: np.ndarray
    feature_names: tuple[str, ...] = FEATURE_NAMES
    flagged: np.ndarray = field(default=None)

    def __post_init__(self):
        self.pairs = _pairs(self.pairs)
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        self.values = np.asarray(self.values)
        self.feature_names = tuple(self.feature_names)
        if self.values.ndim != 2 or self.values.shape != (len(self.pairs), len(self.feature_names)):
            raise DataError(f"feature values have shape {self.values.shape}, expected "
                            f"({len(self.pairs)}, {len(self.feature_names)})")
        if len(self.labels) != len(self.pairs):
            raise DataError("labels and pairs differ in length")
        if not np.isin(self.labels, (0, 1)).all():
            raise DataError("labels must be 0 or 1")
        if self.flagged is None:
            self.flagged = np.zeros(len(self.pairs), dtype=bool)
        key = np.stack([self.pairs.min(axis=1), self.pairs.max(axis=1)], axis=1) if len(self.pairs) else self.pairs
        if len(np.unique(key, axis=0)) != len(key):
            raise DataError("duplicate pairs in a feature matrix")

    def __len__(self):
        return len(self.pairs)

    @property
    def X(self) -> np.ndarray:
        return self.values.astype(np.float64)

    def select(self, names: Sequence[str]) -> "FeatureMatrix":
        try:
            idx = [self.feature_names.index(k) for k in names]
        except ValueError:
            missing = [k for k in names if k not in self.feature_names]
            raise KeyError(f"unknown feature(s): {missing}") from None
        return FeatureMatrix(self.pairs, self.labels, self.values[:, idx], tuple(names), self.flagged)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("x", "y", "label") + self.feature_names)
        integral = np.issubdtype(self.values.dtype, np.integer)
        for (x, y), lab, row in zip(self.pairs.tolist(), self.labels.tolist(), self.values.tolist()):
            cells = row if integral else [repr(float(v)) for v in row]
            w.writerow([x, y, lab, *cells])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, source) -> "FeatureMatrix":
        if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = source
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0][:3]) != ("x", "y", "label"):
            raise DataError("feature CSV must start with the columns x,y,label")
        names = tuple(rows[0][3:])
        body = rows[1:]
        pairs = np.array([[int(r[0]), int(r[1])] for r in body], dtype=np.int64).reshape(-1, 2)
        labels = np.array([int(r[2]) for r in body], dtype=np.int64)
        cells = [r[3:] for r in body]
        try:
            values = np.array([[int(c) for c in row] for row in cells], dtype=np.int64)
        except ValueError:
            values = np.array(cells, dtype=np.float64)
        values = values.reshape(len(body), len(names))
        return cls(pairs, labels, values, names)


def labelled_pairs(positives, negatives) -> tuple[np.ndarray, np.ndarray]:
    """Positives then negatives, with their 1/0 labels."""
    p, q = _pairs(positives), _pairs(negatives)
    return np.concatenate([p, q]), np.concatenate([np.ones(len(p), np.int64), np.zeros(len(q), np.int64)])


def build_features(g_visible: Graph, pairs, labels, workers: int | None = None) -> FeatureMatrix:
    """27 orbit features per pair computed on ``g_visible`` plus the pair.

    Every pair is treated as joined: node features are products
    ``N_i(x) * N_i(y)`` and edge features are ``M_j(x, y)``, both counted on
    ``g_visible + (x, y)``.  Observed and candidate pairs are therefore
    measured under the same convention.
    """
    pairs = _pairs(pairs)
    n = g_visible.node_count
    inside = (pairs >= 0).all(axis=1) & (pairs < n).all(axis=1) if len(pairs) else np.zeros(0, bool)
    values = np.zeros((len(pairs), len(FEATURE_NAMES)), dtype=np.int64)
    ok = pairs[inside]
    if len(ok):
        values[inside, :15] = pair_node_products(g_visible, ok, workers=workers)
        values[inside, 15:] = edge_orbit_table(g_visible, ok, workers=workers)
    return FeatureMatrix(pairs, labels, values, FEATURE_NAMES, ~inside)


@dataclass
class PhaseMatrices:
    train: FeatureMatrix
    validation: FeatureMatrix
    test: FeatureMatrix


def build_phase_matrices(g: Graph, plan: SplitPlan, workers: int | None = None) -> PhaseMatrices:
    """Training/validation matrices on the train graph, test on train+validation."""
    g_train = plan.train_graph(g)
    g_test = plan.test_phase_graph(g)
    return PhaseMatrices(
        train=build_features(g_train, *labelled_pairs(plan.train_edges, plan.negative_train), workers=workers),
        validation=build_features(g_train, *labelled_pairs(plan.validation_edges, plan.negative_validation),
                                  workers=workers),
        test=build_features(g_test, *labelled_pairs(plan.test_edges, plan.negative_test), workers=workers),
    )


def audit_test_isolation(g: Graph, plan: SplitPlan, workers: int | None = None) -> None:
    """Rebuild the test matrix from ``g`` with the test edges physically
    deleted and require byte-identical CSV output."""
    reference = build_features(plan.test_phase_graph(g),
                               *labelled_pairs(plan.test_edges, plan.negative_test), workers=workers)
    keep = ~np.isin(_codes(g.edges(), g.node_count), _codes(plan.test_edges, g.node_count))
    stripped = with_edges(g, g.edges()[keep])
    again = build_features(plan.test_phase_graph(stripped),
                           *labelled_pairs(plan.test_edges, plan.negative_test), workers=workers)
    if reference.to_csv() != again.to_csv():
        raise ValidationError("test-phase features changed after deleting test edges")
