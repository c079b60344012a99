"""
Embeddings and the projected state space
========================================

An embedding (SE) maps a smaller instance into a host. The host's state space,
projected onto the image fluents, then behaves like the smaller instance's
state space. We generate a host with a known embedding, find one ourselves,
and check the projection.
"""

from stripsmorph import Kind, find_morphism, translate_plan
from stripsmorph.generators import positive_pair
from stripsmorph.model import morphism_to_names
from stripsmorph.statespace import check_embedding_abstraction, shortest_plan

host, small, witness = positive_pair(seed=8, kind=Kind.SE, n_fluents=6, n_ops=5)
print(f"host: {host.n_fluents} fluents, {host.n_operators} operators")
print(f"embedded: {small.n_fluents} fluents, {small.n_operators} operators")

# argument order is (host, embedded) for SE
res = find_morphism(host, small, Kind.SE)
print("status:", res.status)
fluents, ops = morphism_to_names(host, small, res.morphism)
print("fluents (embedded -> host):", fluents)
print("active operators (host -> embedded):", ops)

# the projected host transitions are exactly labelled by the mapped operators
rep = check_embedding_abstraction(host, small, res.morphism)
print("abstraction holds:", rep.ok)
print("goal reachable in projection / in embedded:",
      rep.abstract_goal_reachable, rep.embedded_goal_reachable)

# if the host is solvable, so is the embedded instance, and the host plan
# restricted to active operators solves it
print("host plan:", shortest_plan(host))
print("embedded plan:", shortest_plan(small))
print("translated:", translate_plan(host, small, res.morphism, shortest_plan(host)))
