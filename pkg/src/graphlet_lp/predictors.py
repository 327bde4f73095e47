"""Orbit-degree predictors, classical link-prediction indices, and the
identities linking the two.

Classical indices here are computed from neighbourhoods directly, never
from orbit counts, so :func:`verify_decompositions` compares two
independent routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .atlas import EDGE_LABELS, NODE_LABELS
from .errors import ValidationError
from .graph import Graph
from .orbits import edge_orbit_table, node_orbit_table

CLASSICAL_IDS = ("PA", "CN", "AA", "RA", "CAR", "CN_L3", "RA_L3", "KATZ", "MS")


@dataclass(frozen=True)
class KatzConfig:
    """Truncated Katz: ``sum_{l=2}^{max_length} beta**l * walks_l(x, y)``."""

    beta: float = 0.01
    max_length: int = 5

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("Katz beta must be positive")
        if not 2 <= self.max_length <= 6:
            raise ValueError("Katz max_length must lie in [2, 6]")

    def converges_on(self, g: Graph) -> bool:
        """The usual guard ``beta * max_degree < 1``."""
        return self.beta * (int(g.degrees.max()) if g.node_count else 0) < 1


def _index(labels, i):
    if isinstance(i, str):
        return labels.index(i)
    i = int(i)
    if not 0 <= i < len(labels):
        raise IndexError(f"orbit index {i} out of range")
    return i


def popularity_score(nov_x, nov_y, i) -> float:
    """Product of the two endpoints' node orbit degrees for orbit ``i``.

    ``i`` is a label (``"N3"``) or a 0-based column.
    """
    k = _index(NODE_LABELS, i)
    return nov_x[k] * nov_y[k]


def similarity_score(eov, j) -> float:
    """The pair's edge orbit degree for orbit ``j`` (label or 0-based column)."""
    return eov[_index(EDGE_LABELS, j)]


def popularity_scores(node_table: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """All 15 popularity scores for each pair, from a full node orbit table."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return node_table[pairs[:, 0]] * node_table[pairs[:, 1]]


# -- classical indices --------------------------------------------------------

def _katz_scores(g: Graph, pairs: np.ndarray, katz: KatzConfig) -> np.ndarray:
    out = np.zeros(len(pairs), dtype=np.float64)
    if not len(pairs):
        return out
    a = g.adjacency.astype(np.float64)
    sources, inverse = np.unique(pairs[:, 0], return_inverse=True)
    block = 512
    for start in range(0, len(sources), block):
        src = sources[start:start + block]
        walks = np.zeros((g.node_count, len(src)))
        walks[src, np.arange(len(src))] = 1.0
        sel = np.flatnonzero((inverse >= start) & (inverse < start + len(src)))
        cols = inverse[sel] - start
        tgt = pairs[sel, 1]
        for length in range(1, katz.max_length + 1):
            walks = a @ walks
            if length >= 2:
                out[sel] += katz.beta ** length * walks[tgt, cols]
    return out


def classical_indices(g: Graph, x: int, y: int, katz: KatzConfig = KatzConfig()) -> dict[str, float]:
    """Every classical index for one pair.  See :func:`classical_table`."""
    row = classical_table(g, [(x, y)], katz=katz)[0]
    return dict(zip(CLASSICAL_IDS, row.tolist()))


def classical_table(g: Graph, pairs: Iterable[Sequence[int]], ids: Sequence[str] = CLASSICAL_IDS,
                    katz: KatzConfig = KatzConfig()) -> np.ndarray:
    """``(len(pairs), len(ids))`` classical index scores.

    Conventions: AA uses the natural log; CN-L3 and RA-L3 count 3-hop
    paths ``x-i-j-y`` with ``i != y`` and ``j != x`` (so an existing
    ``(x, y)`` edge is never walked); MS is 0 when its denominator is 0.
    """
    pairs = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                       dtype=np.int64).reshape(-1, 2)
    unknown = set(ids) - set(CLASSICAL_IDS)
    if unknown:
        raise KeyError(f"unknown classical index: {sorted(unknown)}")
    for x, y in pairs.tolist():
        g._check(x), g._check(y)
        if x == y:
            raise ValueError("classical indices need two distinct nodes")
    adj = g._adj
    deg = g.degrees
    tri = g.triangles
    want = set(ids)
    cols = {k: np.zeros(len(pairs)) for k in ids}

    for r, (x, y) in enumerate(pairs.tolist()):
        gx = adj[x] - {y}
        gy = adj[y] - {x}
        common = adj[x] & adj[y]
        cn = len(common)
        if "PA" in want:
            cols["PA"][r] = deg[x] * deg[y]
        if "CN" in want:
            cols["CN"][r] = cn
        if "AA" in want:
            cols["AA"][r] = sum(1.0 / math.log(deg[z]) for z in sorted(common))
        if "RA" in want:
            cols["RA"][r] = sum(1.0 / deg[z] for z in sorted(common))
        if "CAR" in want:
            # gamma(z): neighbours of z adjacent to both x and y, excluding x, y
            gamma = sum(len((adj[z] & common) - {x, y}) for z in common)
            cols["CAR"][r] = cn * (gamma / 2)
        if "CN_L3" in want or "RA_L3" in want:
            paths = 0
            ra = 0.0
            for i in sorted(gx):
                hits = adj[i] & gy
                paths += len(hits)
                if hits:
                    ra += sum(1.0 / (deg[i] * deg[j]) for j in sorted(hits))
            if "CN_L3" in want:
                cols["CN_L3"][r] = paths
            if "RA_L3" in want:
                cols["RA_L3"][r] = ra
        if "MS" in want:
            denom = cn + int(tri[x]) + int(tri[y])
            cols["MS"][r] = cn / denom if denom else 0.0
    if "KATZ" in want:
        cols["KATZ"] = _katz_scores(g, pairs, katz)
    return np.stack([cols[k] for k in ids], axis=1) if ids else np.zeros((len(pairs), 0))


# -- decomposition identities -------------------------------------------------

IDENTITIES = ("PA=N1*N1", "CN=M2", "CAR=M2*M12", "CN_L3=M9+M11+2*M12", "MS=M2/(M2+N4+N4)")


class IdentityViolation(ValidationError):
    def __init__(self, identity, pair, classical, orbit):
        self.identity = identity
        self.pair = tuple(pair)
        self.classical = classical
        self.orbit = orbit
        super().__init__(f"{identity} fails at pair {self.pair}: classical={classical!r} orbit={orbit!r}")


@dataclass
class IdentityReport:
    pairs_checked: int
    max_abs_deviation: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def orbit_form_indices(node_table: np.ndarray, edge_table: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """PA, CN, CAR, CN-L3, MS rebuilt from orbit degrees only."""
    nx_, ny_ = node_table[pairs[:, 0]], node_table[pairs[:, 1]]
    m = edge_table
    m2, m9, m11, m12 = m[:, 1], m[:, 8], m[:, 10], m[:, 11]
    denom = m2 + nx_[:, 3] + ny_[:, 3]
    ms = np.divide(m2, denom, out=np.zeros(len(pairs)), where=denom > 0)
    return np.stack([nx_[:, 0] * ny_[:, 0], m2, m2 * m12, m9 + m11 + 2 * m12, ms], axis=1).astype(float)


def verify_decompositions(g: Graph, pairs=None, strict: bool = True) -> IdentityReport:
    """Check the five orbit-degree identities on ``pairs`` (default: all pairs).

    Raises :class:`IdentityViolation` on the first failure when ``strict``.
    """
    if pairs is None:
        if g.node_count > 500:
            raise ValueError("full pair scan limited to 500 nodes; pass a pair sample")
        pairs = np.stack(np.triu_indices(g.node_count, 1), axis=1)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    classical = classical_table(g, pairs, ids=("PA", "CN", "CAR", "CN_L3", "MS"))
    orbit = orbit_form_indices(node_orbit_table(g), edge_orbit_table(g, pairs), pairs)
    dev = np.abs(classical - orbit)
    report = IdentityReport(len(pairs), {k: float(dev[:, i].max()) if len(pairs) else 0.0
                                         for i, k in enumerate(IDENTITIES)})
    bad_rows, bad_cols = np.nonzero(dev > 0)
    for r, c in zip(bad_rows.tolist(), bad_cols.tolist()):
        v = IdentityViolation(IDENTITIES[c], pairs[r].tolist(), classical[r, c], orbit[r, c])
        if strict:
            raise v
        report.violations.append(v)
    return report
