"""Brute-force orbit census by scanning every node subset of size 2-4.

This is the reference the fast counters are checked against.  It shares
nothing with :mod:`graphlet_lp.orbits` except the atlas: each subset's
induced adjacency is packed into a bit code and classified through a table
built by :func:`graphlet_lp.atlas.canonical_label`.
"""

from __future__ import annotations

import itertools
from typing import NamedTuple

import numpy as np

from .atlas import code_tables, pair_positions
from .errors import DataError
from .graph import Graph

MAX_ORACLE_NODES = 200
_CHUNK = 200_000


class OrbitCensus(NamedTuple):
    node: np.ndarray     # (n, 15)
    pairs: np.ndarray    # (P, 2) queried pairs
    edge: np.ndarray     # (P, 12)


def _combinations(n, k):
    it = itertools.chain.from_iterable(itertools.combinations(range(n), k))
    while True:
        block = np.fromiter(itertools.islice(it, _CHUNK * k), dtype=np.int64)
        if not len(block):
            return
        yield block.reshape(-1, k)


def brute_force_orbit_census(g: Graph, pairs=None) -> OrbitCensus:
    """Node orbit vectors of every node and edge orbit vectors of ``pairs``.

    ``pairs`` defaults to every unordered node pair.  Pairs that are not
    edges are scored with the pair's edge added, like the fast counters.
    """
    n = g.node_count
    if n > MAX_ORACLE_NODES:
        raise DataError(f"oracle refuses graphs above {MAX_ORACLE_NODES} nodes (got {n})")
    dense = g.adjacency.toarray().astype(bool)
    node = np.zeros((n, 15), dtype=np.int64)
    pair_acc = np.zeros((n, n, 12), dtype=np.int64)

    edges = g.edges()
    np.add.at(node[:, 0], edges.ravel(), 1)

    for k in (3, 4):
        node_tab, edge_tab = code_tables(k)
        positions = pair_positions(k)
        for combo in _combinations(n, k):
            code = np.zeros(len(combo), dtype=np.int64)
            for b, (i, j) in enumerate(positions):
                code |= dense[combo[:, i], combo[:, j]].astype(np.int64) << b
            orb = node_tab[code]
            for i in range(k):
                ok = orb[:, i] >= 0
                np.add.at(node, (combo[ok, i], orb[ok, i]), 1)
            for b, (i, j) in enumerate(positions):
                joined = code | (1 << b)
                eorb = edge_tab[joined, b]
                ok = eorb >= 0
                np.add.at(pair_acc, (combo[ok, i], combo[ok, j], eorb[ok]), 1)

    if pairs is None:
        iu = np.triu_indices(n, 1)
        pairs = np.stack(iu, axis=1)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    if (lo == hi).any():
        raise ValueError("edge orbit degrees need two distinct nodes")
    return OrbitCensus(node, pairs, pair_acc[lo, hi])
