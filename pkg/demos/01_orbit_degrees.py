"""Orbit degrees on a small graph, and how classical indices fall out of them.

Run: python3 demos/01_orbit_degrees.py
"""

import numpy as np

from graphlet_lp import (EDGE_LABELS, NODE_LABELS, brute_force_orbit_census, classical_indices, edge_orbit_degrees,
                         node_orbit_table, verify_decompositions)
from _common import bundled

g = bundled("karate")
print(f"karate club: {g.node_count} nodes, {g.edge_count} edges\n")

# Node 0 is the instructor, node 33 the administrator: two hubs with very
# different neighbourhoods.
table = node_orbit_table(g)
for v in (0, 33):
    print(f"node {g.label_of(v)}:", dict(zip(NODE_LABELS, table[v].tolist())))

# The pair (0, 33) is not an edge.  Its edge orbit vector describes the
# graphlets that would contain the edge if it were added.
x, y = g.index_of(0), g.index_of(33)
m = edge_orbit_degrees(g, x, y)
print("\npair (0, 33):", dict(zip(EDGE_LABELS, m.tolist())))
print("classical scores:", {k: round(v, 4) for k, v in classical_indices(g, x, y).items()})
print("common neighbours equal M2:", classical_indices(g, x, y)["CN"] == m[1])

# The fast counters agree with an exhaustive census of every 3- and 4-node subset.
census = brute_force_orbit_census(g)
print("\nfast counters match brute force:", np.array_equal(census.node, table))

report = verify_decompositions(g)
print(f"identities checked on {report.pairs_checked} pairs, violations: {len(report.violations)}")
