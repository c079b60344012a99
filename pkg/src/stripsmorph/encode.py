"""CNF encodings of the morphism problems over a DomainTable.

Variables are numbered deterministically: every fluent association in
row-major order (fluent variable major, candidate minor), then operator
associations, then fluent usefulness and operator activity flags (SE only).
Only pairs that survive in the DomainTable receive variables; a pruned pair
is treated as false, and usefulness/activity flags already decided by the
table are substituted by their value instead of getting a variable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .model import EFFECT_PARTS, PARTS, Kind, Morphism, StripsInstance
from .propagate import DomainTable, EarlyUnsat, init_domains, cardinality_check


class MalformedModel(ValueError):
    pass


@dataclass
class VarCatalog:
    kind: Kind
    n_fluent_vars: int
    n_op_vars: int
    tags: list = field(default_factory=list)  # tags[v - 1] = (tag, a, b)
    fassoc: dict = field(default_factory=dict)
    oassoc: dict = field(default_factory=dict)
    fuseful: dict = field(default_factory=dict)
    oactive: dict = field(default_factory=dict)

    def _new(self, tag, a, b=None):
        self.tags.append((tag, a, b))
        return len(self.tags)

    @property
    def num_vars(self) -> int:
        return len(self.tags)

    def describe(self, v: int) -> tuple:
        return self.tags[v - 1]


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list
    catalog: VarCatalog = None

    @property
    def is_unsat_marker(self) -> bool:
        return len(self.clauses) == 1 and len(self.clauses[0]) == 0


def _catalog(P, P2, dt: DomainTable) -> VarCatalog:
    cat = VarCatalog(dt.kind, len(dt.fluent_domains), len(dt.op_domains))
    for i, dom in enumerate(dt.fluent_domains):
        for j in sorted(dom):
            cat.fassoc[(i, j)] = cat._new("fassoc", i, j)
    for r, dom in enumerate(dt.op_domains):
        for s in sorted(dom):
            cat.oassoc[(r, s)] = cat._new("oassoc", r, s)
    if dt.kind is Kind.SE:
        for i in range(P.n_fluents):
            if dt.can_use[i] and dt.can_skip[i]:
                cat.fuseful[i] = cat._new("fuseful", i)
        for r in range(P.n_operators):
            if dt.op_domains[r]:
                cat.oactive[r] = cat._new("oactive", r)
    return cat


def _pairwise(lits):
    for a, b in itertools.combinations(lits, 2):
        yield (-a, -b)


def _iso_clauses(P, P2, dt, cat):
    fa, oa = cat.fassoc, cat.oassoc
    fd, od = dt.fluent_domains, dt.op_domains
    # each fluent/operator has exactly one image
    for i, dom in enumerate(fd):
        lits = [fa[(i, j)] for j in sorted(dom)]
        yield tuple(lits)
        yield from _pairwise(lits)
    for r, dom in enumerate(od):
        lits = [oa[(r, s)] for s in sorted(dom)]
        yield tuple(lits)
        yield from _pairwise(lits)
    # injectivity of the fluent and operator maps
    pre_f = [[] for _ in range(P2.n_fluents)]
    for (i, j), v in fa.items():
        pre_f[j].append(v)
    for lits in pre_f:
        yield from _pairwise(lits)
    pre_o = [[] for _ in range(P2.n_operators)]
    for (r, s), v in oa.items():
        pre_o[s].append(v)
    for lits in pre_o:
        yield from _pairwise(lits)
    # morphism: image of each part included in the target part, and back
    for r, o in enumerate(P.operators):
        for s in sorted(od[r]):
            o2 = P2.operators[s]
            x = oa[(r, s)]
            for part in PARTS:
                mine, theirs = sorted(o.part(part)), o2.part(part)
                for i in mine:
                    yield (-x,) + tuple(fa[(i, j)] for j in sorted(theirs & fd[i]))
                for j in sorted(theirs):
                    yield (-x,) + tuple(fa[(i, j)] for i in mine if j in fd[i])
    if dt.kind in (Kind.SSI, Kind.SI):
        # every fluent of I' (resp. G') is the image of a fluent of I (resp. G)
        for src, dst in ((P.init, P2.init), (P.goal, P2.goal)):
            for j in sorted(dst):
                yield tuple(fa[(i, j)] for i in sorted(src) if j in fd[i])
    if dt.kind is Kind.SI:
        for lits in pre_f:
            yield tuple(lits)
        for lits in pre_o:
            yield tuple(lits)


def _embedding_clauses(P, Pp, dt, cat):
    # P is the large instance; fluent variables range over Pp's fluents
    fa, oa = cat.fassoc, cat.oassoc
    fd, od = dt.fluent_domains, dt.op_domains
    holders = [[] for _ in range(P.n_fluents)]
    for (jp, i), v in fa.items():
        holders[i].append((jp, v))

    def useful(i):
        """Literal for u_i, or True/False when already decided."""
        if i in cat.fuseful:
            return cat.fuseful[i]
        return bool(dt.can_use[i])

    def active(r):
        return cat.oactive.get(r, False)

    def clause(*parts):
        out = []
        for lit in parts:
            if lit is True:
                return None
            if lit is False:
                continue
            out.append(lit)
        return tuple(out)

    def neg(lit):
        return (not lit) if isinstance(lit, bool) else -lit

    def emit(c):
        if c is not None:
            yield c

    for jp, dom in enumerate(fd):
        lits = [fa[(jp, i)] for i in sorted(dom)]
        yield tuple(lits)
        yield from _pairwise(lits)
    for r, dom in enumerate(od):
        lits = [oa[(r, s)] for s in sorted(dom)]
        yield from emit(clause(neg(active(r)), *lits))
        yield from _pairwise(lits)
    for i in range(P.n_fluents):
        yield from _pairwise([v for _, v in holders[i]])
    for r, o in enumerate(P.operators):
        a = active(r)
        if a is False:
            continue
        for s in sorted(od[r]):
            o2 = Pp.operators[s]
            x = oa[(r, s)]
            for part in ("add", "del", "pre"):
                mine = o.part(part)
                for jp in sorted(o2.part(part)):
                    yield from emit(clause(-a, -x, *(fa[(jp, i)] for i in sorted(mine & fd[jp]))))
            for part in EFFECT_PARTS:
                theirs = o2.part(part)
                for i in sorted(o.part(part)):
                    yield from emit(clause(-a, neg(useful(i)), -x,
                                           *(v for jp, v in holders[i] if jp in theirs)))
    for i in sorted(P.init):
        yield from emit(clause(neg(useful(i)),
                               *(v for jp, v in holders[i] if jp in Pp.init)))
    # u_i holds exactly when some fluent variable is mapped to i
    for i in range(P.n_fluents):
        u = useful(i)
        yield from emit(clause(neg(u), *(v for _, v in holders[i])))
        for _, v in holders[i]:
            yield from emit(clause(u, -v))
    for r, o in enumerate(P.operators):
        a = active(r)
        for i in sorted(o.effect_vars):
            yield from emit(clause(neg(useful(i)), a))


def iter_clauses(P: StripsInstance, P2: StripsInstance, dt: DomainTable, cat: VarCatalog = None):
    if cat is None:
        cat = _catalog(P, P2, dt)
    if dt.kind is Kind.SE:
        return _embedding_clauses(P, P2, dt, cat)
    return _iso_clauses(P, P2, dt, cat)


def encode_cnf(P: StripsInstance, P2: StripsInstance, dt: DomainTable, kind=None) -> CnfFormula:
    """Build the CNF whose models are exactly the morphisms allowed by ``dt``."""
    if isinstance(dt, EarlyUnsat):
        raise ValueError("cannot encode an EarlyUnsat table")
    if kind is not None and Kind.parse(kind) is not dt.kind:
        raise ValueError("kind does not match the domain table")
    cat = _catalog(P, P2, dt)
    clauses = []
    for c in iter_clauses(P, P2, dt, cat):
        if not c:
            return CnfFormula(cat.num_vars, [()], cat)
        clauses.append(c)
    return CnfFormula(cat.num_vars, clauses, cat)


def count_clauses(P: StripsInstance, P2: StripsInstance, dt) -> int:
    """Clause count of encode_cnf without materialising the list (0 for EarlyUnsat)."""
    if isinstance(dt, EarlyUnsat):
        return 0
    n = 0
    for c in iter_clauses(P, P2, dt):
        if not c:
            return 1
        n += 1
    return n


@dataclass(frozen=True)
class SimplificationStats:
    clauses_with_cp: int
    clauses_without_cp: int
    fraction: float
    early_unsat: bool = False

    def to_dict(self) -> dict:
        return {"clauses_with_cp": self.clauses_with_cp,
                "clauses_without_cp": self.clauses_without_cp,
                "simplified_fraction": self.fraction, "early_unsat": self.early_unsat}


def baseline_clause_count(P: StripsInstance, P2: StripsInstance, kind) -> int:
    """Clauses of the encoding over initial (unpropagated) domains."""
    if cardinality_check(P, P2, kind) is not None:
        return 0
    return count_clauses(P, P2, init_domains(P, P2, kind))


def simplification_stats(P: StripsInstance, P2: StripsInstance, dt, kind=None,
                         baseline: int = None) -> SimplificationStats:
    """Fraction of baseline clauses removed by pruning; 1.0 when pruning alone concludes."""
    if kind is None:
        if isinstance(dt, EarlyUnsat):
            raise ValueError("kind is required with an EarlyUnsat table")
        kind = dt.kind
    b = baseline_clause_count(P, P2, kind) if baseline is None else baseline
    if isinstance(dt, EarlyUnsat):
        return SimplificationStats(0, b, 1.0, True)
    a = count_clauses(P, P2, dt)
    frac = 0.0 if b == 0 else max(0.0, 1.0 - a / b)
    return SimplificationStats(a, b, frac)


def decode_model(catalog: VarCatalog, assignment: dict, source: str = "",
                 target: str = "") -> Morphism:
    """Read a Morphism off a total assignment of the catalog's variables."""
    fmap: list = [None] * catalog.n_fluent_vars
    for (i, j), v in catalog.fassoc.items():
        if assignment.get(v, False):
            if fmap[i] is not None:
                raise MalformedModel(f"fluent variable {i} has two images")
            fmap[i] = j
    for i, j in enumerate(fmap):
        if j is None:
            raise MalformedModel(f"fluent variable {i} has no image")
    omap: list = [None] * catalog.n_op_vars
    for (r, s), v in catalog.oassoc.items():
        if not assignment.get(v, False):
            continue
        if catalog.kind is Kind.SE and not assignment.get(catalog.oactive.get(r), False):
            continue
        if omap[r] is not None:
            raise MalformedModel(f"operator {r} has two images")
        omap[r] = s
    if catalog.kind is not Kind.SE and any(s is None for s in omap):
        raise MalformedModel("operator without image")
    return Morphism(catalog.kind, tuple(fmap), tuple(omap), source, target)
