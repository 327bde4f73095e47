"""Immutable simple undirected graphs and edge-list ingestion."""

from __future__ import annotations

import io
import os
import re
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import sparse

from .errors import EmptyGraphError, ParseError

_SPLIT = re.compile(r"[,\s]+")


class NodePair(NamedTuple):
    """Unordered node pair stored canonically with ``x < y``."""

    x: int
    y: int

    @classmethod
    def of(cls, a: int, b: int) -> "NodePair":
        a, b = int(a), int(b)
        if a == b:
            raise ValueError(f"a node pair needs two distinct nodes, got ({a}, {b})")
        return cls(a, b) if a < b else cls(b, a)


class Graph:
    """Simple undirected graph over dense node ids ``0..n-1``.

    Adjacency is held in CSR form with each row sorted, plus a per-node
    ``frozenset`` for constant-time membership.  ``labels[i]`` is the
    original label of node ``i`` (an integer from the input file).

    Instances are never mutated after construction; derived statistics
    (triangle counts, sparse matrix) are computed lazily and cached.
    """

    def __init__(self, indptr: np.ndarray, indices: np.ndarray, labels: np.ndarray | None = None):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.node_count = len(self.indptr) - 1
        self.edge_count = len(self.indices) // 2
        if labels is None:
            labels = np.arange(self.node_count, dtype=np.int64)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False
        self.labels.flags.writeable = False
        self._adj = tuple(
            frozenset(self.indices[self.indptr[i]:self.indptr[i + 1]].tolist())
            for i in range(self.node_count)
        )

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence[int]], node_count: int | None = None,
                   labels: np.ndarray | None = None) -> "Graph":
        """Build from ``(u, v)`` pairs over ids ``0..node_count-1``.

        Self-loops are dropped and duplicates (in either orientation) merged.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 2)
        if node_count is None:
            node_count = int(arr.max()) + 1 if len(arr) else 0
        arr = arr[arr[:, 0] != arr[:, 1]]
        if len(arr) and (arr.min() < 0 or arr.max() >= node_count):
            raise IndexError("edge endpoint outside 0..node_count-1")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        und = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(arr) else arr
        both = np.concatenate([und, und[:, ::-1]]) if len(und) else und
        order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.array([], dtype=np.int64)
        both = both[order] if len(both) else both.reshape(0, 2)
        counts = np.bincount(both[:, 0], minlength=node_count) if len(both) else np.zeros(node_count, np.int64)
        indptr = np.concatenate([[0], np.cumsum(counts)])
        return cls(indptr, both[:, 1].copy(), labels)

    # -- queries ----------------------------------------------------------

    def _check(self, x: int) -> int:
        x = int(x)
        if not 0 <= x < self.node_count:
            raise IndexError(f"node {x} out of range 0..{self.node_count - 1}")
        return x

    def neighbors(self, x: int) -> np.ndarray:
        x = self._check(x)
        return self.indices[self.indptr[x]:self.indptr[x + 1]]

    def neighbor_set(self, x: int) -> frozenset:
        return self._adj[self._check(x)]

    def has_edge(self, x: int, y: int) -> bool:
        x, y = self._check(x), self._check(y)
        return y in self._adj[x]

    def degree(self, x: int) -> int:
        x = self._check(x)
        return int(self.indptr[x + 1] - self.indptr[x])

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.indptr)
        d.flags.writeable = False
        return d

    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges with ``u < v``, lexicographically sorted."""
        rows = np.repeat(np.arange(self.node_count), self.degrees)
        keep = rows < self.indices
        return np.stack([rows[keep], self.indices[keep]], axis=1)

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.int64)
        return sparse.csr_matrix((data, self.indices, self.indptr),
                                 shape=(self.node_count, self.node_count))

    @cached_property
    def edge_triangles(self) -> sparse.csr_matrix:
        """Number of triangles through each edge, aligned with ``adjacency``."""
        a = self.adjacency
        t = (a @ a).multiply(a).tocsr()
        t.sort_indices()
        return t

    @cached_property
    def triangles(self) -> np.ndarray:
        """Per-node triangle count."""
        return np.asarray(self.edge_triangles.sum(axis=1)).ravel() // 2

    @cached_property
    def neighbor_degree_sum(self) -> np.ndarray:
        """Sum of neighbour degrees per node."""
        return np.asarray(self.adjacency @ self.degrees.astype(np.int64)).ravel()

    def label_of(self, x: int) -> int:
        return int(self.labels[self._check(x)])

    def index_of(self, label: int) -> int:
        pos = np.searchsorted(self.labels, label)
        if pos < self.node_count and self.labels[pos] == label:
            return int(pos)
        # labels supplied out of order at ingestion
        hit = np.flatnonzero(self.labels == label)
        if len(hit):
            return int(hit[0])
        raise KeyError(label)

    def __repr__(self):
        return f"Graph(n={self.node_count}, m={self.edge_count})"

    def __eq__(self, other):
        return (isinstance(other, Graph)
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.labels, other.labels))

    __hash__ = None


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8"), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8")), True
    if isinstance(source, io.TextIOBase):
        return source, False
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8"), False


def parse_edge_list(source) -> list[tuple[int, int]]:
    """Raw ``(label, label)`` pairs from an edge-list source, comments skipped."""
    fh, owned = _open_text(source)
    pairs = []
    try:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line[0] in "#%":
                continue
            tokens = _SPLIT.split(line)
            if len(tokens) < 2:
                raise ParseError(f"expected two node ids, got {line!r}", lineno)
            try:
                pairs.append((int(tokens[0]), int(tokens[1])))
            except ValueError:
                raise ParseError(f"non-integer node id in {line!r}", lineno) from None
    finally:
        if owned:
            fh.close()
    return pairs


def load_edge_list(source, labels: Sequence[int] | None = None) -> Graph:
    """Read a whitespace- or comma-separated edge list.

    Parameters
    ----------
    source : path, bytes, or text/binary stream
    labels : optional sequence of original labels fixing the dense id
        assignment (label ``labels[i]`` becomes node ``i``).  Labels not
        present in any edge become isolated nodes.  Without it, the labels
        seen in the file are sorted and numbered in order.
    """
    pairs = parse_edge_list(source)
    pairs = [(u, v) for u, v in pairs if u != v]
    if not pairs:
        raise EmptyGraphError("empty graph")
    raw = np.asarray(pairs, dtype=np.int64)
    if labels is None:
        table = np.unique(raw)
    else:
        table = np.asarray(labels, dtype=np.int64)
        if len(np.unique(table)) != len(table):
            raise ParseError("duplicate entries in the label table")
    order = np.argsort(table, kind="stable")
    pos = np.searchsorted(table[order], raw)
    pos = np.clip(pos, 0, len(table) - 1)
    ids = order[pos]
    if not np.array_equal(table[ids], raw):
        missing = sorted(set(raw.ravel().tolist()) - set(table.tolist()))[:5]
        raise ParseError(f"labels missing from the label table: {missing}")
    return Graph.from_edges(ids, node_count=len(table), labels=table)


def write_edge_list(g: Graph, dest) -> None:
    """Write ``g`` as ``label label`` lines (original labels)."""
    lines = "".join(f"{g.labels[u]} {g.labels[v]}\n" for u, v in g.edges())
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(lines)
    else:
        dest.write(lines)


def with_edges(g: Graph, edges: np.ndarray) -> Graph:
    """Graph on the same node set (and labels) holding only ``edges``."""
    return Graph.from_edges(np.asarray(edges, dtype=np.int64).reshape(-1, 2),
                            node_count=g.node_count, labels=g.labels)
