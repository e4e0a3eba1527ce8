"""
Facets of the convex hull of the Coxeter group F4
=================================================

The 1152 matrices of F4 are the vertices of a 16-dimensional polytope.  We
enumerate its facets up to the symmetry group (left and right multiplication,
transposition and the diagram automorphism) with the adjacency decomposition,
then print one representative matrix per orbit.  Runs in one or two minutes.
"""

import time

from birkhoff_facets.adjacency import EnumerationConfig, adjacency_decomposition
from birkhoff_facets.groups import build_symmetry_action, coxeter_group
from birkhoff_facets.polytope import facet_matrix, polytope_of, verify_inequality
from birkhoff_facets.scalar import qe_format
from birkhoff_facets.store import format_report, report

G = coxeter_group("F4")
P = polytope_of(G)
sym = build_symmetry_action(G).perm_group
print(f"|F4| = {G.order}, polytope dimension {P.full_dim}, symmetry order {sym.order}")

# %%
# Adjacency decomposition: start from one facet, flip across ridge orbits,
# keep one record per facet orbit.
t = time.time()
db = adjacency_decomposition(P, sym, EnumerationConfig(), name="F4", matrix_dim=4)
print(f"done in {time.time() - t:.0f}s, {db.rounds} rounds")
print(format_report(report(db), "F4"))

# %%
# Each orbit as an inequality Tr(XA) <= rhs, rescaled to rhs = 1.
for rec in db.sorted_records():
    A, rhs = facet_matrix(P, P.facet_from_incidence(rec.canonical_key), 4)
    A = A / rhs
    print(f"orbit of size {rec.orbit_size}, incidence {rec.incidence_count}, "
          f"stabilizer {rec.stabilizer_order}, rank {rec.rank_of_A}")
    for row in A:
        print("   ", "  ".join(f"{qe_format(x):>6}" for x in row))
    chk = verify_inequality(G, A)
    print(f"    verified: valid {chk.valid}, facet {chk.is_facet}")
