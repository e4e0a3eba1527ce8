"""
Direct and adjacency methods on small groups
============================================

For small reflection groups the full double description is cheap, so both
methods can be compared facet by facet.  Orbit sizes times orbit count must
add up to the number of facets found directly.
"""

from birkhoff_facets.adjacency import EnumerationConfig, adjacency_decomposition, expand_orbits
from birkhoff_facets.dd import direct_dual_description
from birkhoff_facets.groups import build_symmetry_action, coxeter_group
from birkhoff_facets.polytope import polytope_of

print(f"{'group':>6} {'|G|':>5} {'dim':>4} {'facets':>7} {'orbits':>7}  agree")
for name in ["A2", "A3", "B3", "I2_3", "I2_4", "I2_5", "I2_6", "H3"]:
    G = coxeter_group(name)
    P = polytope_of(G)
    sym = build_symmetry_action(G, allow_twisted=True).perm_group
    direct = sorted(f.incidence for f in direct_dual_description(P))
    db = adjacency_decomposition(P, sym, EnumerationConfig(), name=name)
    agree = expand_orbits(db, sym) == direct
    print(f"{name:>6} {G.order:>5} {P.full_dim:>4} {len(direct):>7} {len(db):>7}  {agree}")
