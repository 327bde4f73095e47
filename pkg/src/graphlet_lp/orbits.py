"""Fast node and edge orbit degrees.

Node orbit degrees are obtained from *non-induced* subgraph counts, which
have closed forms in terms of degrees, triangle counts and common-neighbour
counts, followed by the integer inversion of the multiplicity matrix built
in :func:`graphlet_lp.atlas.subgraph_multiplicity`.

Edge orbit degrees of a pair ``(x, y)`` are read directly off a partition of
the merged neighbourhood: private neighbours of ``x``, private neighbours of
``y``, common neighbours, and nodes hanging off those sets.  The pair itself
is always treated as joined (``E + {(x, y)}``), so existing edges and
candidate non-edges are handled by the same code.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .atlas import DEFAULT_ATLAS, OrbitAtlas, subgraph_multiplicity
from .graph import Graph

N_NODE_ORBITS = 15
N_EDGE_ORBITS = 12


@lru_cache(maxsize=None)
def _inverse_multiplicity(size: int) -> np.ndarray:
    m = subgraph_multiplicity(size)
    inv = np.rint(np.linalg.inv(m)).astype(np.int64)
    assert np.array_equal(m @ inv, np.eye(len(m), dtype=np.int64))
    return inv


def _choose2(a):
    return a * (a - 1) // 2


class _View(NamedTuple):
    """The per-node statistics the node counters read."""

    adj: Sequence[frozenset]
    deg: np.ndarray
    tri: np.ndarray
    nds: np.ndarray      # sum of neighbour degrees


def _view(g: Graph) -> _View:
    return _View(g._adj, g.degrees, g.triangles, g.neighbor_degree_sum)


class _AdjOverlay:
    def __init__(self, base, override):
        self.base, self.override = base, override

    def __getitem__(self, i):
        return self.override.get(i, self.base[i])


def _joined_view(g: Graph, x: int, y: int) -> _View:
    """Statistics of ``g`` with the edge ``(x, y)`` added."""
    ax, ay = g._adj[x], g._adj[y]
    common = ax & ay
    deg = g.degrees.copy()
    deg[x] += 1
    deg[y] += 1
    tri = g.triangles.copy()
    tri[[x, y]] += len(common)
    tri[list(common)] += 1
    nds = g.neighbor_degree_sum.copy()
    nds[x] += deg[y]
    nds[y] += deg[x]
    nds[list(ax)] += 1
    nds[list(ay)] += 1
    return _View(_AdjOverlay(g._adj, {x: ax | {y}, y: ay | {x}}), deg, tri, nds)


def _noninduced_node_counts(v: _View, x: int) -> tuple[np.ndarray, np.ndarray]:
    """Non-induced counts for the 3-node and 4-node orbits of ``x``."""
    adj, deg, tri = v.adj, v.deg, v.tri
    nset = adj[x]
    nbrs = np.array(sorted(nset), dtype=np.int64)
    d = len(nbrs)
    t = int(tri[x])
    db = deg[nbrs].astype(np.int64)
    # triangles through each edge (x, b)
    txb = np.fromiter((len(nset & adj[b]) for b in nbrs.tolist()), dtype=np.int64, count=d)

    three = np.array([
        int((db - 1).sum()),        # path-3 with x at an end
        _choose2(d),                # path-3 centred at x
        t,                          # triangle
    ], dtype=np.int64)

    # common-neighbour counts with every node at distance <= 2
    reach = np.fromiter(itertools.chain.from_iterable(adj[b] for b in nbrs.tolist()), dtype=np.int64)
    _, cn = np.unique(reach[reach != x], return_counts=True)
    cycles = int(_choose2(cn).sum())

    # edges inside N(x): diamond (x of degree 2) and 4-clique terms
    diamond2 = 0
    clique = 0
    for a in nbrs.tolist():
        na = adj[a] & nset
        for b in na:
            if b > a:
                diamond2 += len(adj[a] & adj[b]) - 1
                clique += len(na & adj[b])
    clique //= 3

    four = np.array([
        int(_choose2(db - 1).sum()),                                           # claw leaf
        d * (d - 1) * (d - 2) // 6,                                            # claw centre
        int((v.nds[nbrs] - db).sum()) - d * (d - 1) - 2 * t,   # path-4 end
        (d - 1) * int((db - 1).sum()) - 2 * t,                                 # path-4 middle
        cycles,                                                                # 4-cycle
        t * (d - 2),                                                           # paw centre
        int((txb * (db - 2)).sum()),                                           # paw base
        int(tri[nbrs].sum()) - 2 * t,                                          # paw pendant
        diamond2,                                                              # diamond deg-2
        int(_choose2(txb).sum()),                                              # diamond deg-3
        clique,                                                                # 4-clique
    ], dtype=np.int64)
    return three, four


def _node_vector_default(v: _View, x: int) -> np.ndarray:
    three, four = _noninduced_node_counts(v, x)
    out = np.empty(N_NODE_ORBITS, dtype=np.int64)
    out[0] = v.deg[x]
    out[1:4] = _inverse_multiplicity(3) @ three
    out[4:] = _inverse_multiplicity(4) @ four
    return out


def node_orbit_degrees(g: Graph, x: int, atlas: OrbitAtlas = DEFAULT_ATLAS) -> np.ndarray:
    """Orbit degrees ``N1..N15`` of node ``x`` (induced 2-4 node graphlets).

    >>> from graphlet_lp.graph import Graph
    >>> node_orbit_degrees(Graph.from_edges([(0, 1), (0, 2), (0, 3)]), 0).tolist()
    [3, 0, 3, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0]
    """
    x = g._check(x)
    vec = _node_vector_default(_view(g), x)
    if atlas is not DEFAULT_ATLAS:
        vec = vec[atlas.role_permutation()[0]]
    return vec


def edge_orbit_degrees(g: Graph, x: int, y: int, atlas: OrbitAtlas = DEFAULT_ATLAS) -> np.ndarray:
    """Orbit degrees ``M1..M12`` of the pair ``(x, y)``.

    The pair need not be an edge; graphlets are matched on the graph with
    ``(x, y)`` added.  Symmetric in ``x`` and ``y``.
    """
    x, y = g._check(x), g._check(y)
    if x == y:
        raise ValueError("edge orbit degrees need two distinct nodes")
    vec = _edge_vector_default(g._adj, x, y)
    if atlas is not DEFAULT_ATLAS:
        vec = vec[atlas.role_permutation()[1]]
    return vec


def joined_node_orbit_degrees(g: Graph, x: int, y: int,
                              atlas: OrbitAtlas = DEFAULT_ATLAS) -> tuple[np.ndarray, np.ndarray]:
    """Node orbit degrees of ``x`` and ``y`` in ``g`` with the edge ``(x, y)`` added.

    This is the pair-level counterpart of the hypothetical-edge convention
    used for edge orbits.
    """
    x, y = g._check(x), g._check(y)
    if x == y:
        raise ValueError("a pair needs two distinct nodes")
    v = _joined_view(g, x, y) if not g.has_edge(x, y) else _view(g)
    vx, vy = _node_vector_default(v, x), _node_vector_default(v, y)
    if atlas is not DEFAULT_ATLAS:
        perm = atlas.role_permutation()[0]
        vx, vy = vx[perm], vy[perm]
    return vx, vy


def _edge_vector_default(adj, x: int, y: int) -> np.ndarray:
    X = adj[x] - {y}
    Y = adj[y] - {x}
    C = X & Y
    Xo = X - C
    Yo = Y - C
    e_xx = e_yy = e_xy = e_xc = e_yc = e_cc = 0
    hang_private = hang_common = 0
    for c in Xo:
        nb = adj[c]
        nx, ny, nc = len(nb & Xo), len(nb & Yo), len(nb & C)
        e_xx += nx
        e_xy += ny
        e_xc += nc
        hang_private += len(nb) - nx - ny - nc - 1
    for c in Yo:
        nb = adj[c]
        nx, ny, nc = len(nb & Xo), len(nb & Yo), len(nb & C)
        e_yy += ny
        e_yc += nc
        hang_private += len(nb) - nx - ny - nc - 1
    for c in C:
        nb = adj[c]
        nx, ny, nc = len(nb & Xo), len(nb & Yo), len(nb & C)
        e_cc += nc
        hang_common += len(nb) - nx - ny - nc - 2
    e_xx //= 2
    e_yy //= 2
    e_cc //= 2
    a, b, c = len(Xo), len(Yo), len(C)
    return np.array([
        a + b,                                          # M1 path-3
        c,                                              # M2 triangle
        _choose2(a) - e_xx + _choose2(b) - e_yy,        # M3 claw
        a * b - e_xy,                                   # M4 path-4 middle
        hang_private,                                   # M5 path-4 end
        e_xx + e_yy,                                    # M6 paw pendant
        hang_common,                                    # M7 paw opposite
        a * c - e_xc + b * c - e_yc,                    # M8 paw incident
        e_xy,                                           # M9 4-cycle
        _choose2(c) - e_cc,                             # M10 diamond chord
        e_xc + e_yc,                                    # M11 diamond rim
        e_cc,                                           # M12 4-clique
    ], dtype=np.int64)


# -- tables -------------------------------------------------------------------

def _default_workers(workers):
    if workers is None:
        workers = int(os.environ.get("GRAPHLET_LP_THREADS", "1") or 1)
    return max(1, int(workers))


def _node_chunk(args):
    g, xs = args
    v = _view(g)
    return np.array([_node_vector_default(v, x) for x in xs], dtype=np.int64).reshape(-1, N_NODE_ORBITS)


def _pair_chunk(args):
    g, pairs = args
    adj = g._adj
    return np.array([_edge_vector_default(adj, int(x), int(y)) for x, y in pairs],
                    dtype=np.int64).reshape(-1, N_EDGE_ORBITS)


def _joined_pair_chunk(args):
    g, pairs = args
    out = np.empty((len(pairs), N_NODE_ORBITS), dtype=np.int64)
    for k, (x, y) in enumerate(pairs):
        v = _joined_view(g, x, y)
        out[k] = _node_vector_default(v, x) * _node_vector_default(v, y)
    return out


def _run_chunks(fn, g, items, workers, chunk):
    items = list(items)
    if not items:
        return []
    parts = [items[i:i + chunk] for i in range(0, len(items), chunk)]
    if workers == 1 or len(parts) == 1:
        return [fn((g, p)) for p in parts]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, [(g, p) for p in parts]))


def node_orbit_table(g: Graph, nodes: Sequence[int] | None = None, atlas: OrbitAtlas = DEFAULT_ATLAS,
                     workers: int | None = None) -> np.ndarray:
    """``(len(nodes), 15)`` node orbit degrees; results do not depend on ``workers``."""
    nodes = range(g.node_count) if nodes is None else [g._check(x) for x in nodes]
    workers = _default_workers(workers)
    parts = _run_chunks(_node_chunk, g, nodes, workers, chunk=256)
    out = np.concatenate(parts) if parts else np.zeros((0, N_NODE_ORBITS), dtype=np.int64)
    if atlas is not DEFAULT_ATLAS:
        out = out[:, atlas.role_permutation()[0]]
    return out


def edge_orbit_table(g: Graph, pairs: Iterable[Sequence[int]], atlas: OrbitAtlas = DEFAULT_ATLAS,
                     workers: int | None = None) -> np.ndarray:
    """``(len(pairs), 12)`` edge orbit degrees for candidate or existing pairs."""
    pairs = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                       dtype=np.int64).reshape(-1, 2)
    if len(pairs):
        if (pairs[:, 0] == pairs[:, 1]).any():
            raise ValueError("edge orbit degrees need two distinct nodes")
        if pairs.min() < 0 or pairs.max() >= g.node_count:
            raise IndexError("pair endpoint out of range")
    workers = _default_workers(workers)
    parts = _run_chunks(_pair_chunk, g, pairs.tolist(), workers, chunk=2048)
    out = np.concatenate(parts) if parts else np.zeros((0, N_EDGE_ORBITS), dtype=np.int64)
    if atlas is not DEFAULT_ATLAS:
        out = out[:, atlas.role_permutation()[1]]
    return out


def pair_node_products(g: Graph, pairs: Iterable[Sequence[int]], atlas: OrbitAtlas = DEFAULT_ATLAS,
                       workers: int | None = None) -> np.ndarray:
    """``(len(pairs), 15)`` products ``N_i(x) * N_i(y)`` on ``g + (x, y)``.

    Existing edges read the plain node table; only non-adjacent pairs need
    the local recount.
    """
    pairs = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                       dtype=np.int64).reshape(-1, 2)
    out = np.zeros((len(pairs), N_NODE_ORBITS), dtype=np.int64)
    if not len(pairs):
        return out
    if (pairs[:, 0] == pairs[:, 1]).any():
        raise ValueError("a pair needs two distinct nodes")
    if pairs.min() < 0 or pairs.max() >= g.node_count:
        raise IndexError("pair endpoint out of range")
    workers = _default_workers(workers)
    is_edge = np.array([g.has_edge(x, y) for x, y in pairs.tolist()], dtype=bool)
    if is_edge.any():
        nodes = np.unique(pairs[is_edge])
        table = node_orbit_table(g, nodes.tolist(), workers=workers)
        pos = np.searchsorted(nodes, pairs[is_edge])
        out[is_edge] = table[pos[:, 0]] * table[pos[:, 1]]
    rest = pairs[~is_edge].tolist()
    if rest:
        out[~is_edge] = np.concatenate(_run_chunks(_joined_pair_chunk, g, rest, workers, chunk=512))
    if atlas is not DEFAULT_ATLAS:
        out = out[:, atlas.role_permutation()[0]]
    return out
