"""Domain pruning before the SAT search.

A DomainTable holds, for every fluent variable, the set of fluents it may
still be mapped to and, for every operator of the first instance, the set of
operators it may still be mapped to.  For SSI/SSI-H/SI the fluent variables
are the fluents of the first instance; for SE they are the fluents of the
embedded (second) instance and their values are fluents of the first one.
SE tables also track, per fluent of the large instance, whether it can
still be in the image of the embedding (``can_use``) and whether it can
still stay outside of it (``can_skip``).

For SE an empty operator domain is not a contradiction: it only says the
operator can never be active.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .model import EFFECT_PARTS, PARTS, Kind, Operator, StripsInstance


def profile(o: Operator) -> tuple:
    """(|pre|, |add|, |del|, number of strict-delete fluents)."""
    return (len(o.pre), len(o.add), len(o.delete), len(o.pre & o.delete))


def dominated(small: tuple, big: tuple) -> bool:
    return all(a <= b for a, b in zip(small, big))


@dataclass(frozen=True)
class EarlyUnsat:
    reason: str

    def __bool__(self):
        return False


@dataclass
class DomainTable:
    kind: Kind
    fluent_domains: list
    op_domains: list
    can_use: list = field(default_factory=list)
    can_skip: list = field(default_factory=list)
    contradiction: str = ""
    removed_fluent_pairs: int = 0
    removed_op_pairs: int = 0
    revisions: int = 0

    def copy(self) -> "DomainTable":
        return DomainTable(self.kind, [set(d) for d in self.fluent_domains],
                           [set(d) for d in self.op_domains], list(self.can_use),
                           list(self.can_skip), self.contradiction,
                           self.removed_fluent_pairs, self.removed_op_pairs, self.revisions)

    def usefulness(self, f: int) -> str:
        """'useful', 'unknown', 'not-useful' or 'empty' for a fluent of the large instance."""
        u, s = self.can_use[f], self.can_skip[f]
        if u and s:
            return "unknown"
        if u:
            return "useful"
        return "not-useful" if s else "empty"

    def pair_count(self) -> tuple:
        return (sum(map(len, self.fluent_domains)), sum(map(len, self.op_domains)))

    def stats(self) -> dict:
        fp, op = self.pair_count()
        return {"fluent_pairs": fp, "op_pairs": op,
                "pruned_fluent_pairs": self.removed_fluent_pairs,
                "pruned_op_pairs": self.removed_op_pairs, "revisions": self.revisions}


class _Index:
    """Per-instance lookup tables used by the revision rules."""

    def __init__(self, P: StripsInstance):
        self.P = P
        n = P.n_fluents
        # occurrences[f] = [(op, part)] for every part of every op containing f
        self.occurrences = [[] for _ in range(n)]
        self.effect_occurrences = [[] for _ in range(n)]
        for r, o in enumerate(P.operators):
            for part in PARTS:
                for f in o.part(part):
                    self.occurrences[f].append((r, part))
                    if part != "pre":
                        self.effect_occurrences[f].append((r, part))


def init_domains(P: StripsInstance, P2: StripsInstance, kind) -> DomainTable:
    kind = Kind.parse(kind)
    if kind is Kind.SE:
        return _init_embedding(P, P2)
    F2 = frozenset(range(P2.n_fluents))
    if kind is Kind.SSIH:
        fd = [set(F2) for _ in range(P.n_fluents)]
    else:
        I2, G2 = P2.init, P2.goal
        cells = {
            (True, False): I2 - G2,
            (False, True): G2 - I2,
            (True, True): I2 & G2,
            (False, False): F2 - (I2 | G2),
        }
        fd = [set(cells[(f in P.init, f in P.goal)]) for f in range(P.n_fluents)]
    profiles2 = [profile(o) for o in P2.operators]
    od = [{s for s, p2 in enumerate(profiles2) if p2 == profile(o)} for o in P.operators]
    return DomainTable(kind, fd, od)


def _init_embedding(P: StripsInstance, Pp: StripsInstance) -> DomainTable:
    # P is the large instance; variables are the fluents of Pp
    F = frozenset(range(P.n_fluents))
    I, G = P.init, P.goal
    fd = []
    for f in range(Pp.n_fluents):
        in_i, in_g = f in Pp.init, f in Pp.goal
        if in_i and in_g:
            dom = G
        elif in_g:
            dom = G - I
        elif in_i:
            dom = F
        else:
            dom = F - I
        fd.append(set(dom))
    profiles2 = [profile(o) for o in Pp.operators]
    od = [{s for s, p2 in enumerate(profiles2) if dominated(p2, profile(o))}
          for o in P.operators]
    n = P.n_fluents
    return DomainTable(Kind.SE, fd, od, [True] * n, [True] * n)


# -- SSI / SSI-H / SI rules -------------------------------------------------

def _revise_fluent_iso(dt, P, P2, f, ix):
    dom = dt.fluent_domains[f]
    if not dom:
        return False
    keep = set(dom)
    for r, part in ix.occurrences[f]:
        support = set()
        for s in dt.op_domains[r]:
            support |= P2.operators[s].part(part)
        keep &= support
        if not keep:
            break
    if len(keep) == len(dom):
        return False
    dt.removed_fluent_pairs += len(dom) - len(keep)
    dt.fluent_domains[f] = keep
    return True


def _revise_operator_iso(dt, P, P2, r):
    o = P.operators[r]
    dom = dt.op_domains[r]
    fd = dt.fluent_domains
    keep = set()
    for s in dom:
        o2 = P2.operators[s]
        ok = True
        for part in PARTS:
            target = o2.part(part)
            if any(fd[f].isdisjoint(target) for f in o.part(part)):
                ok = False
                break
        if ok:
            keep.add(s)
    if len(keep) == len(dom):
        return False
    dt.removed_op_pairs += len(dom) - len(keep)
    dt.op_domains[r] = keep
    return True


# -- SE rules --------------------------------------------------------------

def _effect_support(dt, Pp, r, part):
    """Fluents of Pp that some candidate image of op r has in ``part``."""
    out = set()
    for s in dt.op_domains[r]:
        out |= Pp.operators[s].part(part)
    return out


def _revise_fluent_embedding(dt, P, Pp, fp, ix):
    dom = dt.fluent_domains[fp]
    keep = set()
    for f in dom:
        if not dt.can_use[f]:
            continue
        if all(fp in _effect_support(dt, Pp, r, part) for r, part in ix.effect_occurrences[f]):
            keep.add(f)
    if len(keep) == len(dom):
        return False
    dt.removed_fluent_pairs += len(dom) - len(keep)
    dt.fluent_domains[fp] = keep
    return True


def _revise_operator_embedding(dt, P, Pp, r):
    o = P.operators[r]
    dom = dt.op_domains[r]
    fd = dt.fluent_domains
    keep = set()
    for s in dom:
        o2 = Pp.operators[s]
        ok = True
        # (i) definitely useful effect fluents need a matching fluent of o2
        for part in EFFECT_PARTS:
            target = o2.part(part)
            for f in o.part(part):
                if dt.can_use[f] and not dt.can_skip[f]:
                    if not any(f in fd[fp] for fp in target):
                        ok = False
                        break
            if not ok:
                break
        # (ii) every fluent of o2 must have a possibly useful counterpart in o
        if ok:
            for part in PARTS:
                mine = o.part(part)
                for fp in o2.part(part):
                    if not any(dt.can_use[f] for f in fd[fp] & mine):
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            keep.add(s)
    if len(keep) == len(dom):
        return False
    dt.removed_op_pairs += len(dom) - len(keep)
    dt.op_domains[r] = keep
    return True


def _holders(dt, f):
    return [fp for fp, d in enumerate(dt.fluent_domains) if f in d]


def revise_usefulness(dt: DomainTable, P: StripsInstance, Pp: StripsInstance, f: int,
                      ix: _Index = None) -> bool:
    if ix is None:
        ix = _Index(P)
    changed = False
    holders = _holders(dt, f)
    if dt.can_use[f]:
        drop = not holders
        if not drop:
            hs = set(holders)
            for r, part in ix.effect_occurrences[f]:
                if hs.isdisjoint(_effect_support(dt, Pp, r, part)):
                    drop = True
                    break
        if drop:
            dt.can_use[f] = False
            changed = True
    if dt.can_skip[f] and any(len(dt.fluent_domains[fp]) == 1 for fp in holders):
        dt.can_skip[f] = False
        changed = True
    if changed and not (dt.can_use[f] or dt.can_skip[f]):
        dt.contradiction = dt.contradiction or f"usefulness of fluent {P.fluents[f]} is empty"
    return changed


@dataclass(frozen=True)
class Contradiction:
    reason: str

    def __bool__(self):
        return False


def usefulness_scan(dt: DomainTable):
    """Pigeonhole over identical fluent domains.

    Returns the set of fluents newly marked useful, or a Contradiction when
    more variables share a domain than it has values.
    """
    groups: dict = {}
    for d in dt.fluent_domains:
        key = frozenset(d)
        groups[key] = groups.get(key, 0) + 1
    newly = set()
    for values, n in groups.items():
        if len(values) < n:
            return Contradiction(f"{n} fluents share a domain of size {len(values)}")
        if len(values) == n:
            for f in values:
                if dt.can_skip[f]:
                    dt.can_skip[f] = False
                    newly.add(f)
    for f in newly:
        if not dt.can_use[f]:
            return Contradiction("fluent forced useful and not useful")
    return newly


# -- public revision entry points -------------------------------------------

def revise_fluent(dt: DomainTable, P: StripsInstance, P2: StripsInstance, f: int,
                  kind=None, ix: _Index = None) -> bool:
    kind = Kind.parse(kind or dt.kind)
    if kind is Kind.SE:
        return _revise_fluent_embedding(dt, P, P2, f, ix or _Index(P))
    return _revise_fluent_iso(dt, P, P2, f, ix or _Index(P))


def revise_operator(dt: DomainTable, P: StripsInstance, P2: StripsInstance, r: int,
                    kind=None) -> bool:
    kind = Kind.parse(kind or dt.kind)
    if kind is Kind.SE:
        return _revise_operator_embedding(dt, P, P2, r)
    return _revise_operator_iso(dt, P, P2, r)


def cardinality_check(P: StripsInstance, P2: StripsInstance, kind):
    kind = Kind.parse(kind)
    if kind is Kind.SE:
        if P2.n_fluents > P.n_fluents:
            return EarlyUnsat("embedded instance has more fluents than the host")
        return None
    if P.n_fluents > P2.n_fluents:
        return EarlyUnsat("source has more fluents than target")
    if kind is Kind.SI and (P.n_fluents != P2.n_fluents or P.n_operators != P2.n_operators):
        return EarlyUnsat("instance sizes differ")
    return None


def empty_domain(dt: DomainTable, P: StripsInstance, P2: StripsInstance):
    """EarlyUnsat if an initial table already has an unsatisfiable variable."""
    names = P2.fluents if dt.kind is Kind.SE else P.fluents
    for f, d in enumerate(dt.fluent_domains):
        if not d:
            return EarlyUnsat(f"fluent {names[f]} has no candidate image")
    if dt.kind is not Kind.SE:
        for r, d in enumerate(dt.op_domains):
            if not d:
                return EarlyUnsat(f"operator {P.operators[r].name} has no candidate image")
    return None


def ac3(P: StripsInstance, P2: StripsInstance, kind):
    """Prune the initial domains to an arc-consistent fixpoint.

    Returns the pruned DomainTable, or EarlyUnsat when no morphism can exist.
    """
    kind = Kind.parse(kind)
    early = cardinality_check(P, P2, kind)
    if early is not None:
        return early
    dt = init_domains(P, P2, kind)
    early = empty_domain(dt, P, P2)
    if early is not None:
        return early
    if kind is Kind.SE:
        return _ac3_embedding(dt, P, P2)
    return _ac3_iso(dt, P, P2)


class _Queue:
    def __init__(self):
        self.items = deque()
        self.pending = set()

    def push(self, item):
        if item not in self.pending:
            self.pending.add(item)
            self.items.append(item)

    def pop(self):
        item = self.items.popleft()
        self.pending.discard(item)
        return item

    def __bool__(self):
        return bool(self.items)


def _ac3_iso(dt, P, P2):
    ix = _Index(P)
    q = _Queue()
    for f in range(P.n_fluents):
        q.push(("f", f))
    for r in range(P.n_operators):
        q.push(("o", r))
    while q:
        what, v = q.pop()
        dt.revisions += 1
        if what == "f":
            if _revise_fluent_iso(dt, P, P2, v, ix):
                if not dt.fluent_domains[v]:
                    return EarlyUnsat(f"fluent {P.fluents[v]} has no candidate image")
                for r in P.depending(v):
                    q.push(("o", r))
        else:
            if _revise_operator_iso(dt, P, P2, v):
                if not dt.op_domains[v]:
                    return EarlyUnsat(f"operator {P.operators[v].name} has no candidate image")
                for f in sorted(P.operators[v].mentioned):
                    q.push(("f", f))
    return dt


def _ac3_embedding(dt, P, Pp):
    ix = _Index(P)
    q = _Queue()
    for fp in range(Pp.n_fluents):
        q.push(("f", fp))
    for f in range(P.n_fluents):
        q.push(("u", f))
    q.push(("t", 0))
    for r in range(P.n_operators):
        q.push(("o", r))

    def usefulness_changed(f):
        for fp, d in enumerate(dt.fluent_domains):
            if f in d:
                q.push(("f", fp))
        for r in P.depending(f):
            q.push(("o", r))

    while q:
        what, v = q.pop()
        dt.revisions += 1
        if what == "f":
            before = set(dt.fluent_domains[v])
            if _revise_fluent_embedding(dt, P, Pp, v, ix):
                after = dt.fluent_domains[v]
                if not after:
                    return EarlyUnsat(f"fluent {Pp.fluents[v]} has no candidate image")
                for f in sorted(before - after):
                    q.push(("u", f))
                    for r in P.depending(f):
                        q.push(("o", r))
                if len(after) == 1:
                    q.push(("u", next(iter(after))))
                q.push(("t", 0))
        elif what == "u":
            if revise_usefulness(dt, P, Pp, v, ix):
                if dt.contradiction:
                    return EarlyUnsat(dt.contradiction)
                usefulness_changed(v)
        elif what == "t":
            res = usefulness_scan(dt)
            if isinstance(res, Contradiction):
                return EarlyUnsat(res.reason)
            for f in sorted(res):
                usefulness_changed(f)
        else:
            before = set(dt.op_domains[v])
            if _revise_operator_embedding(dt, P, Pp, v):
                lost = before - dt.op_domains[v]
                touched = set()
                for s in lost:
                    touched |= Pp.operators[s].mentioned
                for fp in sorted(touched):
                    q.push(("f", fp))
                for f in sorted(P.operators[v].effect_vars):
                    q.push(("u", f))
    return dt


def prune(P: StripsInstance, P2: StripsInstance, kind, use_cp: bool = True):
    """ac3 when ``use_cp``, otherwise the initial domains (with the same
    cardinality and empty-domain short-circuits)."""
    if use_cp:
        return ac3(P, P2, kind)
    early = cardinality_check(P, P2, kind)
    if early is not None:
        return early
    return init_domains(P, P2, kind)
