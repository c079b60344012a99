"""Graph encodings as STRIPS instances and the independent-set reduction.

The brute-force graph deciders at the bottom serve as independent oracles
for the reductions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .model import Operator, StripsInstance


class SelfLoop(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    directed: bool
    edges: frozenset
    names: tuple = field(default=None)

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if not self.directed and u > v:
                u, v = v, u
            norm.add((u, v))
        object.__setattr__(self, "edges", frozenset(norm))
        if self.names is None:
            object.__setattr__(self, "names", tuple(f"v{i + 1}" for i in range(self.n)))
        elif len(self.names) != self.n:
            raise ValueError("one name per vertex required")

    def has_edge(self, u: int, v: int) -> bool:
        if not self.directed and u > v:
            u, v = v, u
        return (u, v) in self.edges

    def arcs(self) -> list:
        """Directed arcs: each undirected edge contributes both directions."""
        out = set(self.edges)
        if not self.directed:
            out |= {(v, u) for u, v in self.edges}
        return sorted(out)


def encode_graph(g: Graph, name: str = "graph") -> StripsInstance:
    """One fluent per vertex and a ``move`` operator per arc."""
    everything = frozenset(range(g.n))
    ops = [Operator(f"move({g.names[u]},{g.names[v]})", {u}, {v}, everything - {v})
           for u, v in g.arcs()]
    return StripsInstance(g.names, frozenset(), frozenset(), ops, name=name)


def reduce_independent_set(g: Graph, k: int) -> tuple:
    """Build ``(P, P')`` so that P' embeds in P iff ``g`` has an independent set of size k."""
    if g.directed:
        raise ValueError("independent-set reduction needs an undirected graph")
    if any(u == v for u, v in g.edges):
        raise SelfLoop("graph has a reflexive edge")
    if not 1 <= k <= g.n:
        raise ValueError(f"k must lie in 1..{g.n}")
    ops = [Operator(f"e({g.names[u]},{g.names[v]})", (), {u, v}, ()) for u, v in sorted(g.edges)]
    P = StripsInstance(g.names, (), (), ops, name="indepset_P")
    small = tuple(str(i) for i in range(1, k + 1))
    small_ops = [Operator("noop")] + [Operator(f"set({i + 1})", (), {i}, ()) for i in range(k)]
    Pp = StripsInstance(small, (), (), small_ops, name="indepset_Pp")
    return P, Pp


# -- oracles ---------------------------------------------------------------

def has_subgraph_matching(small: Graph, large: Graph) -> bool:
    """Is there an injective g with {u,v} in E iff {g u, g v} in E'?"""
    if small.n > large.n:
        return False
    pairs = [(u, v) for u in range(small.n) for v in range(small.n)]
    for img in itertools.permutations(range(large.n), small.n):
        if all(small.has_edge(u, v) == large.has_edge(img[u], img[v]) for u, v in pairs):
            return True
    return False


def has_edge_preserving_map(small: Graph, large: Graph) -> bool:
    """Is there an injective g with {u,v} in E implying {g u, g v} in E'?"""
    if small.n > large.n:
        return False
    for img in itertools.permutations(range(large.n), small.n):
        if all(large.has_edge(img[u], img[v]) for u, v in small.edges):
            return True
    return False


def has_independent_set(g: Graph, k: int) -> bool:
    for combo in itertools.combinations(range(g.n), k):
        if not any(g.has_edge(u, v) for u, v in itertools.combinations(combo, 2)):
            return True
    return False


def random_graph(rng, n: int, p: float = 0.4, directed: bool = False, loops: bool = False) -> Graph:
    edges = []
    for u in range(n):
        for v in range(n):
            if (u == v and not loops) or (not directed and v < u):
                continue
            if rng.random() < p:
                edges.append((u, v))
    return Graph(n, directed, edges)
