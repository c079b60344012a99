"""Seeded generators for random instances and morphism-positive pairs.

Pair convention: ``(A, B, witness)`` with ``verify_morphism(A, B, witness)``
valid.  For SI/SSI-H/SSI, A is the smaller source and B the target; for SE,
A is the host instance and B the embedded one.
"""

from __future__ import annotations

import random

from .model import Kind, Morphism, Operator, StripsInstance


def _rng(seed_or_rng):
    if isinstance(seed_or_rng, random.Random):
        return seed_or_rng
    return random.Random(seed_or_rng)


def _subset(rng, pool, p):
    return frozenset(x for x in pool if rng.random() < p)


def random_operator(rng, name, n_fluents, p_pre=0.3, p_eff=0.25):
    pool = range(n_fluents)
    pre = _subset(rng, pool, p_pre)
    add, delete = set(), set()
    for f in pool:
        x = rng.random()
        if x < p_eff:
            add.add(f)
        elif x < 2 * p_eff:
            delete.add(f)
    if not add and not delete and n_fluents:
        add.add(rng.randrange(n_fluents))
    return Operator(name, pre, add - pre if rng.random() < 0.7 else add, delete)


def random_instance(seed, n_fluents: int, n_ops: int, p_pre=0.3, p_eff=0.25,
                    p_init=0.4, p_goal=0.3, prefix="f", name="random") -> StripsInstance:
    rng = _rng(seed)
    fluents = [f"{prefix}{i}" for i in range(n_fluents)]
    ops = [random_operator(rng, f"op{r}", n_fluents, p_pre, p_eff) for r in range(n_ops)]
    pool = range(n_fluents)
    return StripsInstance(fluents, _subset(rng, pool, p_init), _subset(rng, pool, p_goal),
                          ops, name=name)


def structured_instance(seed, n_fluents: int, n_ops: int, name="structured") -> StripsInstance:
    """Instance shaped like a grounded planning task.

    Fluents come in small groups (object positions); operators move one
    object between two group members with a couple of extra preconditions,
    so profiles repeat the way they do in real domains.
    """
    rng = _rng(seed)
    group = 4
    fluents = [f"at({g},{k})" for g in range(-(-n_fluents // group)) for k in range(group)]
    fluents = fluents[:n_fluents]
    n = len(fluents)
    ops = []
    seen = set()
    tries = 0
    while len(ops) < n_ops and tries < 50 * n_ops:
        tries += 1
        g = rng.randrange(-(-n // group))
        members = [i for i in range(g * group, min(n, g * group + group))]
        if len(members) < 2:
            continue
        src, dst = rng.sample(members, 2)
        extra = set(rng.sample(range(n), rng.randint(0, 2))) - {src, dst}
        side_add = set()
        if rng.random() < 0.3:
            side_add = set(rng.sample(range(n), 1)) - {src, dst} - extra
        key = (src, dst, frozenset(extra), frozenset(side_add))
        if key in seen:
            continue
        seen.add(key)
        ops.append(Operator(f"move{len(ops)}", {src} | extra, {dst} | side_add, {src}))
    init = set()
    for g in range(-(-n // group)):
        members = [i for i in range(g * group, min(n, g * group + group))]
        init.add(rng.choice(members))
    goal = _subset(rng, range(n), 0.15)
    return StripsInstance(fluents, init, goal, ops, name=name)


def _rename(P: StripsInstance, rng, prefix: str, name: str, shuffle=True):
    """Shuffle ids and rename; returns (instance, fluent_perm, op_perm) with
    perm[old_id] = new_id."""
    fperm = list(range(P.n_fluents))
    operm = list(range(P.n_operators))
    if shuffle:
        rng.shuffle(fperm)
        rng.shuffle(operm)
    inv_f = [0] * P.n_fluents
    for old, new in enumerate(fperm):
        inv_f[new] = old
    fluents = [f"{prefix}{i}" for i in range(P.n_fluents)]

    def m(s):
        return frozenset(fperm[f] for f in s)

    ops: list = [None] * P.n_operators
    for old, o in enumerate(P.operators):
        ops[operm[old]] = Operator(f"{prefix}op{operm[old]}", m(o.pre), m(o.add), m(o.delete))
    return StripsInstance(fluents, m(P.init), m(P.goal), ops, name=name), fperm, operm


def _restrict(P: StripsInstance, keep_fluents, keep_ops, name):
    """Sub-instance on the given fluents/operators; ids are compacted."""
    fl = sorted(keep_fluents)
    new_id = {f: i for i, f in enumerate(fl)}

    def m(s):
        return frozenset(new_id[f] for f in s if f in new_id)

    ops = [Operator(P.operators[r].name, m(P.operators[r].pre), m(P.operators[r].add),
                    m(P.operators[r].delete)) for r in keep_ops]
    return StripsInstance([P.fluents[f] for f in fl], m(P.init), m(P.goal), ops, name=name), fl


def ssi_positive(base: StripsInstance, rng, kind=Kind.SSI, drop_ops=0.3, drop_fluents=0.3):
    """Carve a sub-instance out of ``base`` so that it maps into ``base``."""
    kind = Kind.parse(kind)
    target, _, _ = _rename(base, rng, "t", base.name + "_target")
    if kind is Kind.SI:
        fluents = set(range(target.n_fluents))
        ops = list(range(target.n_operators))
    else:
        protected = target.init | target.goal if kind is Kind.SSI else frozenset()
        fluents = {f for f in range(target.n_fluents)
                   if f in protected or rng.random() >= drop_fluents}
        ops = [r for r, o in enumerate(target.operators)
               if o.mentioned <= fluents and rng.random() >= drop_ops]
    sub, fl = _restrict(target, fluents, ops, base.name + "_source")
    if kind is Kind.SSIH:
        # the homogeneous variant ignores I and G; perturb them to show it
        sub = StripsInstance(sub.fluents, _subset(rng, range(sub.n_fluents), 0.4),
                             _subset(rng, range(sub.n_fluents), 0.3), sub.operators, sub.name)
    source, fperm, operm = _rename(sub, rng, "s", sub.name)
    ups: list = [0] * source.n_fluents
    for old, new in enumerate(fperm):
        ups[new] = fl[old]
    nu: list = [0] * source.n_operators
    for old, new in enumerate(operm):
        nu[new] = ops[old]
    w = Morphism(kind, tuple(ups), tuple(nu), source.name, target.name)
    return source, target, w


def se_positive(base: StripsInstance, rng, keep=0.5, drop_pre=0.3, weaken_goal=0.3,
                strengthen_init=0.3, extra_ops=2):
    """Project ``base`` on a fluent subset and simplify it into an embedded instance."""
    if base.n_fluents == 0:
        raise ValueError("an embedding needs at least one fluent in the base instance")
    host, _, _ = _rename(base, rng, "h", base.name + "_host")
    n = host.n_fluents
    E = sorted(f for f in range(n) if rng.random() < keep) or [rng.randrange(n)]
    pos = {f: k for k, f in enumerate(E)}
    Eset = frozenset(E)

    def proj(s):
        return frozenset(pos[f] for f in s if f in pos)

    ops: list = []
    structure: dict = {}
    nu: list = [None] * host.n_operators
    for r, o in enumerate(host.operators):
        if not (o.effect_vars & Eset):
            continue
        pre = frozenset(f for f in proj(o.pre) if rng.random() >= drop_pre)
        key = (pre, proj(o.add), proj(o.delete))
        if key not in structure:
            structure[key] = len(ops)
            ops.append(Operator(f"e{len(ops)}", *key))
        nu[r] = structure[key]
    for _ in range(extra_ops):
        o = random_operator(rng, f"e{len(ops)}", len(E))
        ops.append(o)
    goal = frozenset(f for f in proj(host.goal) if rng.random() >= weaken_goal)
    init = proj(host.init) | frozenset(k for k in range(len(E))
                                       if rng.random() < strengthen_init)
    small = StripsInstance([f"e{k}" for k in range(len(E))], init, goal, ops,
                           name=base.name + "_embedded")
    embedded, fperm, operm = _rename(small, rng, "x", small.name)
    ups: list = [0] * embedded.n_fluents
    for old, new in enumerate(fperm):
        ups[new] = E[old]
    nu = tuple(None if s is None else operm[s] for s in nu)
    w = Morphism(Kind.SE, tuple(ups), nu, host.name, embedded.name)
    return host, embedded, w


def positive_pair(seed, kind, n_fluents: int, n_ops: int, structured=False):
    rng = _rng(seed)
    kind = Kind.parse(kind)
    if structured:
        base = structured_instance(rng, n_fluents, n_ops, name="base")
    else:
        base = random_instance(rng, n_fluents, n_ops, name="base")
    if kind is Kind.SE:
        return se_positive(base, rng)
    return ssi_positive(base, rng, kind)


def _mutate(P: StripsInstance, rng) -> StripsInstance:
    """Flip one membership somewhere in the instance."""
    if P.n_fluents == 0:
        return P
    f = rng.randrange(P.n_fluents)
    init, goal, ops = set(P.init), set(P.goal), list(P.operators)
    what = rng.choice(["init", "goal", "op", "op"]) if ops else rng.choice(["init", "goal"])
    if what == "init":
        init ^= {f}
    elif what == "goal":
        goal ^= {f}
    else:
        r = rng.randrange(len(ops))
        o = ops[r]
        pre, add, dl = set(o.pre), set(o.add), set(o.delete)
        part = rng.choice([pre, add, dl])
        part ^= {f}
        if part is add:
            dl.discard(f)
        elif part is dl:
            add.discard(f)
        ops[r] = Operator(o.name, pre, add, dl)
    return StripsInstance(P.fluents, init, goal, ops, name=P.name)


def random_pair(seed, kind, max_small=5, max_large=6):
    """A small pair for oracle comparisons: about half derived from a
    witness, some of those perturbed into near misses, the rest independent."""
    rng = _rng(seed)
    kind = Kind.parse(kind)
    mode = rng.random()
    if kind is Kind.SE:
        if mode < 0.35:
            nf = rng.randint(1, max_large)
            base = random_instance(rng, nf, rng.randint(0, max_large), name="host")
            host, emb, _ = se_positive(base, rng, keep=rng.uniform(0.2, 0.9),
                                       extra_ops=rng.randint(0, 1))
            while emb.n_operators > max_small:
                emb = StripsInstance(emb.fluents, emb.init, emb.goal, emb.operators[:-1], emb.name)
            if mode < 0.15:
                emb = _mutate(emb, rng) if rng.random() < 0.5 else emb
                host = _mutate(host, rng) if rng.random() < 0.5 else host
            return host, emb
        host = random_instance(rng, rng.randint(1, max_large), rng.randint(0, max_large),
                               name="host")
        emb = random_instance(rng, rng.randint(1, max_small), rng.randint(0, max_small),
                              p_eff=0.2, prefix="g", name="embedded")
        return host, emb
    if mode < 0.5:
        nf = rng.randint(1, max_large if kind is not Kind.SI else max_small)
        no = rng.randint(0, max_large if kind is not Kind.SI else max_small)
        base = random_instance(rng, nf, no, name="target")
        src, tgt, _ = ssi_positive(base, rng, kind)
        if src.n_fluents > max_small or src.n_operators > max_small:
            keep_f = set(range(min(src.n_fluents, max_small)))
            keep_o = [r for r, o in enumerate(src.operators) if o.mentioned <= keep_f][:max_small]
            src, _ = _restrict(src, keep_f, keep_o, src.name)
        if mode < 0.25:
            if rng.random() < 0.5:
                src = _mutate(src, rng)
            else:
                tgt = _mutate(tgt, rng)
        return src, tgt
    small = random_instance(rng, rng.randint(1, max_small), rng.randint(0, max_small),
                            prefix="s", name="source")
    if kind is Kind.SI:
        large = random_instance(rng, small.n_fluents, small.n_operators, prefix="t",
                                name="target")
    else:
        large = random_instance(rng, rng.randint(small.n_fluents, max_large),
                                rng.randint(0, max_large), prefix="t", name="target")
    return small, large
