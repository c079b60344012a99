import random

import pytest
from hypothesis import given, settings
from strategies import graphs

from stripsmorph.graphs import (
    Graph,
    SelfLoop,
    encode_graph,
    has_edge_preserving_map,
    has_independent_set,
    has_subgraph_matching,
    random_graph,
    reduce_independent_set,
)
from stripsmorph.model import Kind
from stripsmorph.search import ORACLE_LIMIT, brute_force, find_morphism


def test_directed_single_edge():
    P = encode_graph(Graph(2, True, [(0, 1)]))
    assert P.n_fluents == 2 and P.n_operators == 1
    o = P.operators[0]
    assert (o.pre, o.add, o.delete) == ({0}, {1}, {0})
    assert P.init == set() and P.goal == set()


def test_undirected_edge_gives_both_directions():
    P = encode_graph(Graph(2, False, [(0, 1)]))
    assert sorted(o.name for o in P.operators) == ["move(v1,v2)", "move(v2,v1)"]


def test_empty_graph():
    P = encode_graph(Graph(3, False, []))
    assert P.n_fluents == 3 and P.n_operators == 0


def test_graph_rejects_out_of_range_edges():
    with pytest.raises(ValueError):
        Graph(2, False, [(0, 2)])


@given(graphs())
def test_encode_graph_shape(g):
    P = encode_graph(g)
    arcs = len(g.edges) if g.directed else 2 * len(g.edges)
    assert P.n_operators == arcs - (0 if g.directed else sum(u == v for u, v in g.edges))
    for o in P.operators:
        (t,) = o.add
        assert o.delete == set(range(g.n)) - {t}


def _path3():
    return Graph(3, False, [(0, 1)])


def test_independent_set_reduction_shape():
    P, Pp = reduce_independent_set(_path3(), 2)
    assert P.fluents == ("v1", "v2", "v3") and Pp.fluents == ("1", "2")
    assert [(o.pre, o.add, o.delete) for o in P.operators] == [(set(), {0, 1}, set())]
    assert [(o.pre, o.add, o.delete) for o in Pp.operators] == \
        [(set(), set(), set()), (set(), {0}, set()), (set(), {1}, set())]
    assert not (P.init or P.goal or Pp.init or Pp.goal)


def test_independent_set_examples():
    P, Pp = reduce_independent_set(_path3(), 2)
    assert find_morphism(P, Pp, Kind.SE).status == "found"
    P, Pp = reduce_independent_set(_path3(), 3)
    assert find_morphism(P, Pp, Kind.SE).status == "none"
    P, Pp = reduce_independent_set(Graph(4, False, []), 4)
    assert find_morphism(P, Pp, Kind.SE).status == "found"


def test_independent_set_reduction_errors():
    with pytest.raises(SelfLoop):
        reduce_independent_set(Graph(2, False, [(0, 0)]), 1)
    with pytest.raises(ValueError):
        reduce_independent_set(Graph(2, True, [(0, 1)]), 1)
    with pytest.raises(ValueError):
        reduce_independent_set(Graph(2, False, []), 3)
    with pytest.raises(ValueError):
        reduce_independent_set(Graph(2, False, []), 0)


def test_oracles_on_known_graphs():
    tri = Graph(3, False, [(0, 1), (1, 2), (0, 2)])
    path = Graph(3, False, [(0, 1), (1, 2)])
    assert has_independent_set(path, 2) and not has_independent_set(tri, 2)
    assert has_edge_preserving_map(path, tri) and not has_subgraph_matching(path, tri)
    assert has_subgraph_matching(Graph(2, False, [(0, 1)]), path)
    assert not has_subgraph_matching(Graph(2, False, []), tri)


def _independent_sets_by_bitmask(g, k):
    # second decider: scan bitmasks instead of combinations
    for mask in range(1 << g.n):
        if bin(mask).count("1") != k:
            continue
        if all(not (mask >> u & 1 and mask >> v & 1) for u, v in g.edges):
            return True
    return False


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=6, directed=False))
def test_independent_set_reduction_property(g):
    g = Graph(g.n, False, [(u, v) for u, v in g.edges if u != v])
    for k in range(1, min(g.n, 4) + 1):
        P, Pp = reduce_independent_set(g, k)
        expected = _independent_sets_by_bitmask(g, k)
        assert has_independent_set(g, k) == expected
        assert (find_morphism(P, Pp, Kind.SE).status == "found") == expected


def _ssi_exact_characterisation(small, large):
    if not small.edges:
        return small.n <= large.n
    return small.n == large.n and has_edge_preserving_map(small, large)


def test_move_operator_encoding_ssi_matches_exact_characterisation():
    """SSI between move-operator graph encodings holds exactly when the small
    graph is edgeless and fits, or both have the same vertex count and an
    edge-preserving bijection exists (every move deletes all other vertices,
    which pins the vertex counts together)."""
    rng = random.Random(7)
    for _ in range(150):
        n = rng.randint(1, 4)
        m = rng.randint(n, 5)
        small = random_graph(rng, n, rng.uniform(0.2, 0.8))
        large = random_graph(rng, m, rng.uniform(0.2, 0.8))
        A, B = encode_graph(small, "small"), encode_graph(large, "large")
        got = find_morphism(A, B, Kind.SSI).status == "found"
        assert got == _ssi_exact_characterisation(small, large)
        if max(A.n_operators, B.n_operators) <= ORACLE_LIMIT:
            assert got == (brute_force(A, B, Kind.SSI).status == "found")


def test_random_graph_is_seeded():
    a = random_graph(random.Random(3), 5, 0.5)
    b = random_graph(random.Random(3), 5, 0.5)
    assert a == b
    assert all(u < v for u, v in a.edges)


def test_every_pair_checked_in_matching_oracle():
    # the matching oracle must reject maps that create extra edges
    small = Graph(3, False, [(0, 1)])
    large = Graph(3, False, [(0, 1), (1, 2)])
    assert has_subgraph_matching(small, large) is False
    assert has_edge_preserving_map(small, large) is True
