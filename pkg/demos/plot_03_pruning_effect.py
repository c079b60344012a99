"""
How much pruning shrinks the encoding
=====================================

Arc consistency over the candidate domains removes most of the clauses the
SAT encoding would otherwise contain. We compare the pipeline with and
without pruning on a structured pair with a few dozen fluents.
"""

from stripsmorph import Kind, find_morphism
from stripsmorph.generators import positive_pair

A, B, _ = positive_pair(seed=6, kind=Kind.SSIH, n_fluents=40, n_ops=40, structured=True)
print(f"source: {A.n_fluents} fluents, target: {B.n_fluents} fluents")

for use_cp in (True, False):
    res = find_morphism(A, B, Kind.SSIH, use_cp=use_cp, baseline=True)
    s = res.stats
    print(f"pruning={use_cp!s:5}  status={res.status}  vars={s.num_vars:6}  "
          f"clauses={s.clauses:7}  total={s.total_time:.3f}s")

with_cp = find_morphism(A, B, Kind.SSIH, baseline=True).stats
print(f"clauses removed by pruning: {with_cp.simplified_fraction:.1%}")
print("domain sizes after pruning:", with_cp.domains)
