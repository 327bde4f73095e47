"""Seeded random graph generators with a known dominant link mechanism."""

from __future__ import annotations

import numpy as np

from .graph import Graph


def _finish(n, edges) -> Graph:
    return Graph.from_edges(np.asarray(sorted(edges), dtype=np.int64).reshape(-1, 2), node_count=n)


def erdos_renyi(n: int, p: float, seed: int = 0) -> Graph:
    rng = np.random.default_rng(seed)
    iu = np.stack(np.triu_indices(n, 1), axis=1)
    return Graph.from_edges(iu[rng.random(len(iu)) < p], node_count=n)


def preferential_attachment(n: int, m: int = 3, seed: int = 0) -> Graph:
    """Barabasi-Albert growth: each new node links to ``m`` degree-biased targets."""
    rng = np.random.default_rng(seed)
    edges = {(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)}
    pool = [v for e in edges for v in e]
    for v in range(m + 1, n):
        targets = set()
        while len(targets) < m:
            targets.add(pool[rng.integers(len(pool))])
        for t in sorted(targets):
            edges.add((t, v))
            pool += [t, v]
    return _finish(n, edges)


def triadic_closure(n: int, m: int = 4, p_close: float = 0.97, seed: int = 0) -> Graph:
    """Growth where each new node attaches to one random node and then, with
    probability ``p_close``, to a neighbour of a node it already joined."""
    rng = np.random.default_rng(seed)
    adj = [set() for _ in range(n)]
    for i in range(m + 1):
        for j in range(i + 1, m + 1):
            adj[i].add(j)
            adj[j].add(i)
    for v in range(m + 1, n):
        first = int(rng.integers(v))
        joined = [first]
        while len(joined) < m:
            if rng.random() < p_close:
                anchor = joined[int(rng.integers(len(joined)))]
                cands = sorted(adj[anchor] - set(joined))
                if cands:
                    joined.append(cands[int(rng.integers(len(cands)))])
                    continue
            t = int(rng.integers(v))
            if t not in joined:
                joined.append(t)
        for t in joined:
            adj[v].add(t)
            adj[t].add(v)
    return _finish(n, {(min(a, b), max(a, b)) for a in range(n) for b in adj[a]})


def star_rich(n: int, hubs: int = 40, p_hub: float = 0.05, seed: int = 0) -> Graph:
    """Hubs with disjoint-ish leaf sets: each non-hub joins one or two hubs
    drawn with probability proportional to hub size, hubs are sparsely
    interlinked, and leaves never link to one another."""
    rng = np.random.default_rng(seed)
    weight = rng.pareto(1.5, size=hubs) + 1.0
    weight /= weight.sum()
    edges = set()
    for i in range(hubs):
        for j in range(i + 1, hubs):
            if rng.random() < p_hub:
                edges.add((i, j))
    for v in range(hubs, n):
        k = 1 + int(rng.random() < 0.5)
        for h in rng.choice(hubs, size=k, replace=False, p=weight):
            edges.add((int(h), v))
    return _finish(n, edges)
