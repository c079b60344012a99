"""End-to-end morphism search, the brute-force oracle and SSI-to-SE conversion."""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Iterator, Optional

from . import encode as enc
from .model import (
    EFFECT_PARTS,
    Kind,
    Morphism,
    StripsInstance,
    active_operators,
    verify_morphism,
)
from .propagate import EarlyUnsat, prune
from .sat import SolverConfig, solve


class InternalInconsistency(RuntimeError):
    """A solver model failed verification: the encoding is wrong."""


class TooLarge(ValueError):
    pass


class InvalidInput(ValueError):
    pass


@dataclass
class RunStats:
    kind: str = ""
    use_cp: bool = True
    cp_time: float = 0.0
    compile_time: float = 0.0
    solve_time: float = 0.0
    num_vars: int = 0
    clauses: int = 0
    baseline_clauses: Optional[int] = None
    simplified_fraction: Optional[float] = None
    early_unsat: bool = False
    early_reason: str = ""
    solver: dict = field(default_factory=dict)
    domains: dict = field(default_factory=dict)

    @property
    def total_time(self) -> float:
        return self.cp_time + self.compile_time + self.solve_time

    def to_dict(self) -> dict:
        d = asdict(self)
        d["total_time"] = self.total_time
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_table(self) -> str:
        rows = [(k, v) for k, v in sorted(self.to_dict().items())
                if not isinstance(v, dict)]
        width = max(len(k) for k, _ in rows)
        out = []
        for k, v in rows:
            if isinstance(v, float):
                v = f"{v:.4f}"
            out.append(f"{k.ljust(width)}  {v}")
        return "\n".join(out)


@dataclass
class Found:
    morphism: Morphism
    stats: RunStats = None
    status = "found"


@dataclass
class NoMorphism:
    reason: str = ""
    stats: RunStats = None
    status = "none"


@dataclass
class Timeout:
    stats: RunStats = None
    status = "timeout"


def find_morphism(P: StripsInstance, P2: StripsInstance, kind, cfg: SolverConfig = None,
                  use_cp: bool = True, baseline: bool = False):
    """Prune, encode, solve, decode and verify.

    For SE, ``P`` is the large instance and ``P2`` the one to embed.  With
    ``baseline`` the clause count of the unpruned encoding is computed as
    well (outside the timed phases) to report the simplified fraction.
    """
    kind = Kind.parse(kind)
    cfg = cfg or SolverConfig()
    stats = RunStats(kind=kind.value, use_cp=use_cp)
    t0 = time.perf_counter()
    dt = prune(P, P2, kind, use_cp)
    stats.cp_time = time.perf_counter() - t0
    if baseline:
        s = enc.simplification_stats(P, P2, dt, kind)
        stats.baseline_clauses = s.clauses_without_cp
        stats.simplified_fraction = s.fraction
    if isinstance(dt, EarlyUnsat):
        stats.early_unsat = True
        stats.early_reason = dt.reason
        return NoMorphism(dt.reason, stats)
    stats.domains = dt.stats()
    t0 = time.perf_counter()
    formula = enc.encode_cnf(P, P2, dt)
    stats.compile_time = time.perf_counter() - t0
    stats.num_vars = formula.num_vars
    stats.clauses = len(formula.clauses)
    if formula.is_unsat_marker:
        return NoMorphism("encoding has an empty clause", stats)
    t0 = time.perf_counter()
    res = solve(formula, cfg)
    stats.solve_time = time.perf_counter() - t0
    stats.solver = res.stats
    if res.status == "timeout":
        return Timeout(stats)
    if res.status == "unsat":
        return NoMorphism("formula is unsatisfiable", stats)
    try:
        m = enc.decode_model(formula.catalog, res.model, P.name, P2.name)
    except enc.MalformedModel as e:
        raise InternalInconsistency(str(e)) from None
    report = verify_morphism(P, P2, m)
    if not report.ok:
        raise InternalInconsistency("; ".join(map(str, report.violations)))
    return Found(m, stats)


# -- brute force ----------------------------------------------------------------

ORACLE_LIMIT = 8


def _guard(P, P2):
    if max(P.n_fluents, P2.n_fluents, P.n_operators, P2.n_operators) > ORACLE_LIMIT:
        raise TooLarge(f"brute force is limited to {ORACLE_LIMIT} fluents and operators")


def _iso_op_maps(P, P2, ups, surjective) -> Iterator[tuple]:
    """Injective operator maps compatible with the fluent map ``ups``."""
    by_structure: dict = {}
    for s, o2 in enumerate(P2.operators):
        by_structure.setdefault((o2.pre, o2.add, o2.delete), []).append(s)
    cands = []
    for o in P.operators:
        key = tuple(frozenset(ups[f] for f in o.part(p)) for p in ("pre", "add", "del"))
        c = by_structure.get(key)
        if not c:
            return
        cands.append(c)

    chosen: list = []
    used: set = set()

    def rec(r):
        if r == len(cands):
            if not surjective or len(used) == P2.n_operators:
                yield tuple(chosen)
            return
        for s in cands[r]:
            if s in used:
                continue
            chosen.append(s)
            used.add(s)
            yield from rec(r + 1)
            chosen.pop()
            used.discard(s)

    yield from rec(0)


def _iso_morphisms(P, P2, kind):
    if P.n_fluents > P2.n_fluents:
        return
    if kind is Kind.SI and (P.n_fluents != P2.n_fluents or P.n_operators != P2.n_operators):
        return
    exact = kind in (Kind.SI, Kind.SSI)
    for ups in itertools.permutations(range(P2.n_fluents), P.n_fluents):
        if exact:
            if frozenset(ups[f] for f in P.init) != P2.init:
                continue
            if frozenset(ups[f] for f in P.goal) != P2.goal:
                continue
        for nu in _iso_op_maps(P, P2, ups, kind is Kind.SI):
            yield Morphism(kind, ups, nu, P.name, P2.name)


def _embedding_candidates(P, Pp, ups, r):
    image = frozenset(ups)
    o = P.operators[r]
    out = []
    for s, o2 in enumerate(Pp.operators):
        if all(frozenset(ups[f] for f in o2.part(p)) == o.part(p) & image for p in EFFECT_PARTS) \
                and frozenset(ups[f] for f in o2.pre) <= o.pre & image:
            out.append(s)
    return out


def _embeddings(P, Pp):
    if Pp.n_fluents > P.n_fluents:
        return
    for ups in itertools.permutations(range(P.n_fluents), Pp.n_fluents):
        image = frozenset(ups)
        if not frozenset(ups[f] for f in Pp.goal) <= P.goal & image:
            continue
        if not frozenset(ups[f] for f in Pp.init) >= P.init & image:
            continue
        active = active_operators(P, image)
        cands = [_embedding_candidates(P, Pp, ups, r) for r in active]
        if any(not c for c in cands):
            continue
        for choice in itertools.product(*cands):
            nu: list = [None] * P.n_operators
            for r, s in zip(active, choice):
                nu[r] = s
            yield Morphism(Kind.SE, ups, tuple(nu), P.name, Pp.name)


def all_morphisms(P: StripsInstance, P2: StripsInstance, kind) -> Iterator[Morphism]:
    """Every morphism in lexicographic order of (fluent map, operator map).

    SE morphisms leave inactive operators unmapped.
    """
    kind = Kind.parse(kind)
    _guard(P, P2)
    if kind is Kind.SE:
        return _embeddings(P, P2)
    return _iso_morphisms(P, P2, kind)


def brute_force(P: StripsInstance, P2: StripsInstance, kind):
    kind = Kind.parse(kind)
    for m in all_morphisms(P, P2, kind):
        if verify_morphism(P, P2, m).ok:
            return Found(m)
        raise InternalInconsistency("brute-force candidate failed verification")
    return NoMorphism("exhaustive enumeration found nothing")


# -- SSI to SE --------------------------------------------------------------------

def embedding_from_ssi(P: StripsInstance, P2: StripsInstance, m: Morphism) -> Morphism:
    """Turn an SSI from P to P2 into an embedding of P2's fluents back into P.

    The result is checked with ``verify_morphism(P, P2, result)``: P plays the
    host role and its operators keep their images.  Fluents of P2 outside the
    image of the SSI go to fluent 0 of P.
    """
    if m.kind not in (Kind.SSI,):
        raise InvalidInput("an SSI morphism is required")
    if P.n_fluents == 0:
        raise InvalidInput("the source instance has no fluents")
    try:
        rep = verify_morphism(P, P2, m)
    except ValueError as e:
        raise InvalidInput(str(e)) from None
    if not rep.ok:
        raise InvalidInput("; ".join(map(str, rep.violations)))
    inverse = {j: i for i, j in enumerate(m.fluent_map)}
    ups = tuple(inverse.get(q, 0) for q in range(P2.n_fluents))
    return Morphism(Kind.SE, ups, m.op_map, P.name, P2.name)
