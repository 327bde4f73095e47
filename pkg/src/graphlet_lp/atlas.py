"""Graphlets on 2-4 nodes, their automorphism orbits, and orbit labels.

Each graphlet is stored as one labelled representative.  Orbits are not
hard-coded: they are derived from the automorphism group of the
representative, and the atlas only names them (``N1``..``N15`` for node
orbits, ``M1``..``M12`` for edge orbits) by pointing at one member.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, NamedTuple, Sequence

import numpy as np


class Graphlet(NamedTuple):
    name: str
    size: int
    edges: tuple[tuple[int, int], ...]


GRAPHLETS: tuple[Graphlet, ...] = (
    Graphlet("edge", 2, ((0, 1),)),
    Graphlet("path3", 3, ((0, 1), (1, 2))),
    Graphlet("triangle", 3, ((0, 1), (0, 2), (1, 2))),
    Graphlet("claw", 4, ((0, 1), (0, 2), (0, 3))),
    Graphlet("path4", 4, ((0, 1), (1, 2), (2, 3))),
    # triangle 0-1-2 with pendant 3 hanging off node 0
    Graphlet("paw", 4, ((0, 1), (0, 2), (1, 2), (0, 3))),
    Graphlet("cycle4", 4, ((0, 1), (1, 2), (2, 3), (0, 3))),
    # chord 0-1; nodes 2 and 3 adjacent to both chord ends
    Graphlet("diamond", 4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3))),
    Graphlet("clique4", 4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))),
)
GRAPHLET_INDEX = {g.name: i for i, g in enumerate(GRAPHLETS)}


class NodeOrbit(NamedTuple):
    label: str
    graphlet: str
    node: int          # a representative member in the graphlet's labelling
    role: str


class EdgeOrbit(NamedTuple):
    label: str
    graphlet: str
    edge: tuple[int, int]
    role: str


DEFAULT_NODE_ORBITS = (
    NodeOrbit("N1", "edge", 0, "edge endpoint"),
    NodeOrbit("N2", "path3", 0, "path-3 end"),
    NodeOrbit("N3", "path3", 1, "path-3 centre"),
    NodeOrbit("N4", "triangle", 0, "triangle"),
    NodeOrbit("N5", "claw", 1, "claw leaf"),
    NodeOrbit("N6", "claw", 0, "claw centre"),
    NodeOrbit("N7", "path4", 0, "path-4 end"),
    NodeOrbit("N8", "path4", 1, "path-4 middle"),
    NodeOrbit("N9", "cycle4", 0, "4-cycle"),
    NodeOrbit("N10", "paw", 0, "paw centre"),
    NodeOrbit("N11", "paw", 1, "paw triangle base"),
    NodeOrbit("N12", "paw", 3, "paw pendant"),
    NodeOrbit("N13", "diamond", 2, "diamond degree-2"),
    NodeOrbit("N14", "diamond", 0, "diamond degree-3"),
    NodeOrbit("N15", "clique4", 0, "4-clique"),
)

DEFAULT_EDGE_ORBITS = (
    EdgeOrbit("M1", "path3", (0, 1), "path-3"),
    EdgeOrbit("M2", "triangle", (0, 1), "triangle"),
    EdgeOrbit("M3", "claw", (0, 1), "claw"),
    EdgeOrbit("M4", "path4", (1, 2), "path-4 middle"),
    EdgeOrbit("M5", "path4", (0, 1), "path-4 end"),
    EdgeOrbit("M6", "paw", (0, 3), "paw pendant"),
    EdgeOrbit("M7", "paw", (1, 2), "paw opposite"),
    EdgeOrbit("M8", "paw", (0, 1), "paw incident"),
    EdgeOrbit("M9", "cycle4", (0, 1), "4-cycle"),
    EdgeOrbit("M10", "diamond", (0, 1), "diamond chord"),
    EdgeOrbit("M11", "diamond", (0, 2), "diamond rim"),
    EdgeOrbit("M12", "clique4", (0, 1), "4-clique"),
)

NODE_CATEGORY_BLOCKS = {
    "first": ("N1", "N3", "N6"),
    "second": ("N2", "N4", "N5", "N8", "N10", "N11"),
    "third": ("N7", "N9", "N12", "N13", "N14", "N15"),
}
EDGE_CATEGORY_BLOCKS = {
    "first": ("M1", "M2", "M3", "M4", "M8", "M10"),
    "second": ("M5", "M6", "M7", "M9", "M11", "M12"),
}

NODE_LABELS = tuple(o.label for o in DEFAULT_NODE_ORBITS)
EDGE_LABELS = tuple(o.label for o in DEFAULT_EDGE_ORBITS)
FEATURE_NAMES = NODE_LABELS + EDGE_LABELS

CATEGORY_NAMES = (
    "popularity-1st", "popularity-2nd", "popularity-3rd",
    "similarity-1st", "similarity-2nd",
)


def _invert_blocks(blocks):
    return {label: cat for cat, labels in blocks.items() for label in labels}


@dataclass(frozen=True, eq=False)
class OrbitAtlas:
    """Named node/edge orbits of the 2-4 node graphlets.

    The label -> structural-role assignment is a table; pass custom
    ``node_orbits``/``edge_orbits`` to relabel (the counters always work on
    structural roles and are translated through the atlas).
    """

    node_orbits: tuple[NodeOrbit, ...] = DEFAULT_NODE_ORBITS
    edge_orbits: tuple[EdgeOrbit, ...] = DEFAULT_EDGE_ORBITS
    node_order_category: Mapping[str, str] = field(
        default_factory=lambda: _invert_blocks(NODE_CATEGORY_BLOCKS))
    edge_order_category: Mapping[str, str] = field(
        default_factory=lambda: _invert_blocks(EDGE_CATEGORY_BLOCKS))

    def __post_init__(self):
        if len(self.node_orbits) != 15 or len(self.edge_orbits) != 12:
            raise ValueError("an atlas needs exactly 15 node orbits and 12 edge orbits")
        node_part = {}
        for o in self.node_orbits:
            key = (o.graphlet, node_orbit_partition(o.graphlet)[o.node])
            if key in node_part:
                raise ValueError(f"{o.label} and {node_part[key]} name the same orbit")
            node_part[key] = o.label
        edge_part = {}
        for o in self.edge_orbits:
            key = (o.graphlet, edge_orbit_partition(o.graphlet)[tuple(sorted(o.edge))])
            if key in edge_part:
                raise ValueError(f"{o.label} and {edge_part[key]} name the same orbit")
            edge_part[key] = o.label
        object.__setattr__(self, "_node_key", node_part)
        object.__setattr__(self, "_edge_key", edge_part)

    @property
    def node_labels(self) -> tuple[str, ...]:
        return tuple(o.label for o in self.node_orbits)

    @property
    def edge_labels(self) -> tuple[str, ...]:
        return tuple(o.label for o in self.edge_orbits)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.node_labels + self.edge_labels

    def node_label(self, graphlet: str, node: int) -> str:
        return self._node_key[(graphlet, node_orbit_partition(graphlet)[node])]

    def edge_label(self, graphlet: str, edge: tuple[int, int]) -> str | None:
        if graphlet == "edge":
            return None
        return self._edge_key[(graphlet, edge_orbit_partition(graphlet)[tuple(sorted(edge))])]

    def category_of(self, feature: str) -> str:
        """Popularity/similarity order category of a feature label."""
        if feature in self.node_order_category:
            return "popularity-" + _ORD[self.node_order_category[feature]]
        if feature in self.edge_order_category:
            return "similarity-" + _ORD[self.edge_order_category[feature]]
        raise KeyError(f"no category for feature {feature!r}")

    def role_permutation(self, default: "OrbitAtlas | None" = None) -> tuple[np.ndarray, np.ndarray]:
        """Column permutations taking default-atlas order to this atlas' order."""
        default = default or DEFAULT_ATLAS
        node = [default.node_labels.index(default.node_label(o.graphlet, o.node))
                for o in self.node_orbits]
        edge = [default.edge_labels.index(default.edge_label(o.graphlet, o.edge))
                for o in self.edge_orbits]
        return np.array(node), np.array(edge)


_ORD = {"first": "1st", "second": "2nd", "third": "3rd"}


# -- automorphisms and orbits --------------------------------------------------

def _edge_set(edges):
    return frozenset(frozenset(e) for e in edges)


@lru_cache(maxsize=None)
def automorphisms(name: str) -> tuple[tuple[int, ...], ...]:
    """All node permutations of a graphlet's representative preserving adjacency."""
    g = GRAPHLETS[GRAPHLET_INDEX[name]]
    es = _edge_set(g.edges)
    return tuple(
        p for p in itertools.permutations(range(g.size))
        if _edge_set((p[u], p[v]) for u, v in g.edges) == es
    )


@lru_cache(maxsize=None)
def node_orbit_partition(name: str) -> tuple[int, ...]:
    """Orbit id (smallest member) of every node of the representative."""
    size = GRAPHLETS[GRAPHLET_INDEX[name]].size
    auts = automorphisms(name)
    return tuple(min(p[v] for p in auts) for v in range(size))


@lru_cache(maxsize=None)
def edge_orbit_partition(name: str) -> dict:
    """Orbit id (smallest member edge) of every edge of the representative."""
    g = GRAPHLETS[GRAPHLET_INDEX[name]]
    auts = automorphisms(name)
    out = {}
    for u, v in g.edges:
        images = [tuple(sorted((p[u], p[v]))) for p in auts]
        out[tuple(sorted((u, v)))] = min(images)
    return out


# -- canonical labelling ------------------------------------------------------

class CanonicalForm(NamedTuple):
    graphlet: str
    mapping: tuple[int, ...]          # input node i -> representative node
    node_orbits: tuple[str, ...]      # label per input node
    edge_orbits: dict                 # (i, j) with i < j -> label (None for 2-node)


def _as_edges(adjacency) -> tuple[int, list[tuple[int, int]]]:
    a = np.asarray(adjacency)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("adjacency must be a square matrix")
    k = a.shape[0]
    a = a.astype(bool)
    if a.diagonal().any() or (a != a.T).any():
        raise ValueError("adjacency must be symmetric without self-loops")
    return k, [(i, j) for i in range(k) for j in range(i + 1, k) if a[i, j]]


def canonical_label(adjacency, atlas: "OrbitAtlas | None" = None) -> CanonicalForm:
    """Identify the graphlet of a connected 2-4 node graph and each node/edge orbit.

    Exhaustive over the (at most 24) node permutations.
    """
    atlas = atlas or DEFAULT_ATLAS
    k, edges = _as_edges(adjacency)
    if not 2 <= k <= 4:
        raise ValueError(f"graphlets have 2-4 nodes, got {k}")
    target = _edge_set(edges)
    for g in GRAPHLETS:
        if g.size != k or len(g.edges) != len(edges):
            continue
        rep = _edge_set(g.edges)
        for p in itertools.permutations(range(k)):
            if _edge_set((p[u], p[v]) for u, v in edges) == rep:
                nodes = tuple(atlas.node_label(g.name, p[i]) for i in range(k))
                eorb = {(u, v): atlas.edge_label(g.name, (p[u], p[v])) for u, v in edges}
                return CanonicalForm(g.name, p, nodes, eorb)
    raise ValueError("graph is disconnected")


def is_connected(k: int, edges: Sequence[tuple[int, int]]) -> bool:
    seen, stack = {0}, [0]
    while stack:
        u = stack.pop()
        for a, b in edges:
            for s, t in ((a, b), (b, a)):
                if s == u and t not in seen:
                    seen.add(t)
                    stack.append(t)
    return len(seen) == k


# -- lookup tables over labelled k-node graphs ---------------------------------

def pair_positions(k: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


@lru_cache(maxsize=None)
def code_tables(k: int, atlas: "OrbitAtlas | None" = None):
    """Classify every labelled graph on ``k`` nodes by its adjacency bit-code.

    Bit ``b`` of the code is set iff the ``b``-th pair of
    :func:`pair_positions` is an edge.  Returns ``(node_orbit, edge_orbit)``
    integer arrays of shape ``(2**P, k)`` and ``(2**P, P)`` holding default
    column indices into ``N1..N15`` / ``M1..M12``, or ``-1`` where the code
    is disconnected or the pair is not an edge.
    """
    atlas = atlas or DEFAULT_ATLAS
    pairs = pair_positions(k)
    ncode = 1 << len(pairs)
    node_tab = -np.ones((ncode, k), dtype=np.int64)
    edge_tab = -np.ones((ncode, len(pairs)), dtype=np.int64)
    nl, el = atlas.node_labels, atlas.edge_labels
    for code in range(ncode):
        edges = [pairs[b] for b in range(len(pairs)) if code >> b & 1]
        if not is_connected(k, edges):
            continue
        adj = np.zeros((k, k), dtype=bool)
        for u, v in edges:
            adj[u, v] = adj[v, u] = True
        form = canonical_label(adj, atlas)
        node_tab[code] = [nl.index(lbl) for lbl in form.node_orbits]
        for b, e in enumerate(pairs):
            lbl = form.edge_orbits.get(e)
            if lbl is not None:
                edge_tab[code, b] = el.index(lbl)
    return node_tab, edge_tab


@lru_cache(maxsize=None)
def subgraph_multiplicity(size: int) -> np.ndarray:
    """Non-induced -> induced conversion matrix for node orbits of one graphlet size.

    Entry ``[r, s]`` counts the spanning connected edge-subsets of the
    graphlet owning orbit ``s`` in which a fixed node of orbit ``s`` lands
    in orbit ``r``.  So ``noninduced = M @ induced`` restricted to the orbits
    of graphlets with ``size`` nodes (rows/columns in default label order).
    """
    atlas = DEFAULT_ATLAS
    labels = [o for o in atlas.node_orbits if GRAPHLETS[GRAPHLET_INDEX[o.graphlet]].size == size]
    idx = {o.label: i for i, o in enumerate(labels)}
    m = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for col, o in enumerate(labels):
        g = GRAPHLETS[GRAPHLET_INDEX[o.graphlet]]
        for r in range(size - 1, len(g.edges) + 1):
            for sub in itertools.combinations(g.edges, r):
                if not is_connected(size, sub):
                    continue
                adj = np.zeros((size, size), dtype=bool)
                for u, v in sub:
                    adj[u, v] = adj[v, u] = True
                form = canonical_label(adj, atlas)
                m[idx[form.node_orbits[o.node]], col] += 1
    return m


DEFAULT_ATLAS = OrbitAtlas()
