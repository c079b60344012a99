"""Independent oracles used by the tests.

Nothing here calls into the package's verification or search code; the
checks are re-derived straight from the definitions so they can catch bugs
in the implementation.
"""

import itertools

import numpy as np

from stripsmorph.model import StripsInstance


def fixture_instances():
    P_ab = StripsInstance.from_names("ab", "a", "b", [("o1", "a", "b", "a")], "P_ab")
    P_xy = StripsInstance.from_names("xy", "x", "y", [("p1", "x", "y", "x")], "P_xy")
    P_xyz = StripsInstance.from_names(
        "xyz", "x", "y", [("p1", "x", "y", "x"), ("p2", "y", "z", "")], "P_xyz")
    P_b = StripsInstance.from_names(["b'"], [], ["b'"], [("q1", [], ["b'"], [])], "P_b")
    return P_ab, P_xy, P_xyz, P_b


def _img(fmap, fs):
    return {fmap[f] for f in fs}


def recheck(P, P2, kind, fmap, omap):
    """Condition-by-condition check of a morphism given as plain lists.

    Returns the set of failed condition names.
    """
    kind = getattr(kind, "value", kind)
    bad = set()
    if kind == "se":
        host, small = P, P2
        if len(set(fmap)) != len(fmap):
            bad.add("injective")
        image = set(fmap)
        for r, o in enumerate(host.operators):
            if not ((set(o.add) | set(o.delete)) & image):
                continue
            s = omap[r]
            if s is None:
                bad.add("coverage")
                continue
            o2 = small.operators[s]
            if _img(fmap, o2.add) != set(o.add) & image:
                bad.add("add")
            if _img(fmap, o2.delete) != set(o.delete) & image:
                bad.add("del")
            if not _img(fmap, o2.pre) <= set(o.pre) & image:
                bad.add("pre")
        if not _img(fmap, small.goal) <= set(host.goal) & image:
            bad.add("goal")
        if not _img(fmap, small.init) >= set(host.init) & image:
            bad.add("init")
        return bad
    if len(set(fmap)) != len(fmap):
        bad.add("injective")
    if len(set(omap)) != len(omap):
        bad.add("op_injective")
    for r, o in enumerate(P.operators):
        o2 = P2.operators[omap[r]]
        if (_img(fmap, o.pre), _img(fmap, o.add), _img(fmap, o.delete)) != \
                (set(o2.pre), set(o2.add), set(o2.delete)):
            bad.add("morphism")
    if kind in ("si", "ssi"):
        if _img(fmap, P.init) != set(P2.init):
            bad.add("init")
        if _img(fmap, P.goal) != set(P2.goal):
            bad.add("goal")
    if kind == "si":
        if len(set(fmap)) != P2.n_fluents or len(set(omap)) != P2.n_operators:
            bad.add("surjective")
    return bad


def simulate(P, plan):
    """Final state of ``plan`` from I, or None if some step is inapplicable."""
    s = set(P.init)
    for r in plan:
        o = P.operators[r]
        if not set(o.pre) <= s:
            return None
        s = (s - set(o.delete)) | set(o.add)
    return s


def solves(P, plan):
    s = simulate(P, plan)
    return s is not None and set(P.goal) <= s


def truth_table(num_vars, clauses):
    """All satisfying assignments as a boolean matrix (rows = assignments)."""
    if num_vars == 0:
        rows = np.zeros((1, 0), dtype=bool)
    else:
        idx = np.arange(1 << num_vars, dtype=np.int64)
        rows = ((idx[:, None] >> np.arange(num_vars)) & 1).astype(bool)
    ok = np.ones(rows.shape[0], dtype=bool)
    for c in clauses:
        sat = np.zeros(rows.shape[0], dtype=bool)
        for lit in c:
            col = rows[:, abs(lit) - 1]
            sat |= col if lit > 0 else ~col
        ok &= sat
    return rows[ok]


def random_cnf(rng, max_vars=16, max_clauses=70):
    n = rng.randint(0, max_vars)
    if n == 0:
        return 0, [] if rng.random() < 0.5 else [()]
    m = rng.randint(0, max_clauses)
    clauses = []
    for _ in range(m):
        k = rng.randint(1, min(4, n))
        vs = rng.sample(range(1, n + 1), k)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return n, clauses


def all_plans(P, max_len):
    for k in range(max_len + 1):
        yield from itertools.product(range(P.n_operators), repeat=k)


def brute_force_matching(small, large):
    """Induced subgraph matching by trying every injective vertex map."""
    if small.n > large.n:
        return False
    for img in itertools.permutations(range(large.n), small.n):
        ok = True
        for u in range(small.n):
            for v in range(small.n):
                if small.has_edge(u, v) != large.has_edge(img[u], img[v]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False


# -- session-wide witness re-check ----------------------------------------------

WITNESSES = {"checked": 0, "failures": []}


def install_witness_recheck():
    """Wrap find_morphism and brute_force so every Found result is re-checked
    with ``recheck``; results accumulate in WITNESSES."""
    import functools

    import stripsmorph
    import stripsmorph.search as search

    if getattr(search.find_morphism, "rechecked", False):
        return

    def wrap(fn):
        @functools.wraps(fn)
        def inner(P, P2, kind, *args, **kwargs):
            res = fn(P, P2, kind, *args, **kwargs)
            if res.status == "found":
                m = res.morphism
                WITNESSES["checked"] += 1
                bad = recheck(P, P2, m.kind, m.fluent_map, m.op_map)
                if bad:
                    WITNESSES["failures"].append((P.name, P2.name, m.kind.value, sorted(bad)))
            return res
        inner.rechecked = True
        return inner

    search.find_morphism = wrap(search.find_morphism)
    search.brute_force = wrap(search.brute_force)
    stripsmorph.find_morphism = search.find_morphism
    stripsmorph.brute_force = search.brute_force
