"""
Finding a morphism between two small instances
==============================================

Two hand-written instances: a two-fluent task and a three-fluent task with an
extra operator. We search for a strong simulation-induced morphism (SSI),
verify it, and carry a plan from the small instance over to the large one.
"""

from stripsmorph import Kind, StripsInstance, find_morphism, translate_plan, verify_morphism
from stripsmorph.model import morphism_to_names, validate_plan
from stripsmorph.statespace import shortest_plan

# a single operator moves the token from a to b
P = StripsInstance.from_names("ab", init="a", goal="b",
                              operators=[("o1", "a", "b", "a")], name="P_ab")

# same move between x and y, plus an operator that adds z
P2 = StripsInstance.from_names("xyz", init="x", goal="y",
                               operators=[("p1", "x", "y", "x"), ("p2", "y", "z", "")],
                               name="P_xyz")

res = find_morphism(P, P2, Kind.SSI)
print("status:", res.status)
fluents, ops = morphism_to_names(P, P2, res.morphism)
print("fluents:", fluents)
print("operators:", ops)

# every returned morphism has already been verified; do it again for show
print("verified:", verify_morphism(P, P2, res.morphism).ok)

# a solution plan of P maps to a solution plan of P2
plan = shortest_plan(P)
image = translate_plan(P, P2, res.morphism, plan)
print("plan in P2:", [P2.operators[r].name for r in image])
print("solves P2:", validate_plan(P2, image, as_solution=True))

# the reverse direction has no morphism: P2 has more fluents than P
print("reverse:", find_morphism(P2, P, Kind.SSI).status)
