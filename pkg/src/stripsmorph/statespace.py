"""Explicit labelled transition systems for small instances, projections,
and executable checks relating an embedding to the projection it induces.

States are bitmasks: bit ``k`` stands for the ``k``-th fluent listed in
``Lts.fluents``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .model import Kind, Morphism, StripsInstance, verify_morphism
from .search import InvalidInput, TooLarge

DEFAULT_CAP = 15


@dataclass
class Lts:
    fluents: tuple  # fluent ids of the owning instance, one per bit
    transitions: frozenset  # (state, op id, state)
    init: int
    goals: frozenset

    @property
    def n_states(self) -> int:
        return 1 << len(self.fluents)

    @property
    def states(self) -> range:
        return range(self.n_states)

    def as_set(self, state: int) -> frozenset:
        return frozenset(f for k, f in enumerate(self.fluents) if state >> k & 1)

    def mask(self, fluent_set) -> int:
        pos = {f: k for k, f in enumerate(self.fluents)}
        return sum(1 << pos[f] for f in fluent_set)

    def successors(self) -> dict:
        out: dict = {}
        for s1, _, s2 in self.transitions:
            out.setdefault(s1, set()).add(s2)
        return out

    def reachable(self, start: int = None) -> set:
        succ = self.successors()
        start = self.init if start is None else start
        seen = {start}
        todo = [start]
        while todo:
            s = todo.pop()
            for t in succ.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return seen

    def goal_reachable(self) -> bool:
        return not self.goals.isdisjoint(self.reachable())

    def to_dot(self, P: StripsInstance = None) -> str:
        def label(s):
            fs = sorted(self.as_set(s))
            names = [P.fluents[f] for f in fs] if P else [str(f) for f in fs]
            return "{" + ",".join(names) + "}"

        lines = ["digraph lts {"]
        for s in self.states:
            shape = "doublecircle" if s in self.goals else "circle"
            lines.append(f'  s{s} [label="{label(s)}", shape={shape}];')
        lines.append(f"  init -> s{self.init};")
        lines.append("  init [shape=point];")
        for s1, r, s2 in sorted(self.transitions):
            name = P.operators[r].name if P else str(r)
            lines.append(f'  s{s1} -> s{s2} [label="{name}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _op_masks(P: StripsInstance):
    out = []
    for o in P.operators:
        out.append((sum(1 << f for f in o.pre), sum(1 << f for f in o.add),
                    sum(1 << f for f in o.delete)))
    return out


def build_lts(P: StripsInstance, cap: int = DEFAULT_CAP) -> Lts:
    n = P.n_fluents
    if n > cap:
        raise TooLarge(f"{n} fluents exceed the cap of {cap}")
    ops = _op_masks(P)
    trans = set()
    for s in range(1 << n):
        for r, (pre, add, dl) in enumerate(ops):
            if s & pre == pre:
                trans.add((s, r, (s & ~dl) | add))
    g = sum(1 << f for f in P.goal)
    goals = frozenset(s for s in range(1 << n) if s & g == g)
    return Lts(tuple(range(n)), frozenset(trans), sum(1 << f for f in P.init), goals)


def project_lts(P: StripsInstance, E, cap: int = DEFAULT_CAP) -> Lts:
    """Abstract LTS of the projection ``s -> s & E``."""
    E = sorted(set(E))
    if any(not 0 <= f < P.n_fluents for f in E):
        raise ValueError("projection set is not a subset of the fluents")
    full = build_lts(P, cap)
    pos = {f: k for k, f in enumerate(E)}

    def alpha(s):
        return sum(1 << pos[f] for f in E if s >> f & 1)

    trans = frozenset((alpha(a), r, alpha(b)) for a, r, b in full.transitions)
    goals = frozenset(alpha(s) for s in full.goals)
    return Lts(tuple(E), trans, alpha(full.init), goals)


def shortest_plan(P: StripsInstance, max_states: int = 1 << 16):
    """Breadth-first search for a shortest solution-plan, or None."""
    ops = _op_masks(P)
    g = sum(1 << f for f in P.goal)
    start = sum(1 << f for f in P.init)
    parent = {start: None}
    q = deque([start])
    while q:
        s = q.popleft()
        if s & g == g:
            plan = []
            while parent[s] is not None:
                s, r = parent[s]
                plan.append(r)
            return tuple(reversed(plan))
        for r, (pre, add, dl) in enumerate(ops):
            if s & pre == pre:
                t = (s & ~dl) | add
                if t not in parent:
                    if len(parent) >= max_states:
                        raise TooLarge("state limit reached")
                    parent[t] = (s, r)
                    q.append(t)
    return None


@dataclass
class AbstractionReport:
    bijection: bool = True
    transition_counterexamples: list = field(default_factory=list)
    abstract_goal_reachable: bool = False
    embedded_goal_reachable: bool = False
    notes: list = field(default_factory=list)

    @property
    def goal_transfer(self) -> bool:
        return self.embedded_goal_reachable or not self.abstract_goal_reachable

    @property
    def ok(self) -> bool:
        return self.bijection and not self.transition_counterexamples and self.goal_transfer

    def to_dict(self) -> dict:
        return {"ok": self.ok, "bijection": self.bijection,
                "transition_counterexamples": self.transition_counterexamples,
                "abstract_goal_reachable": self.abstract_goal_reachable,
                "embedded_goal_reachable": self.embedded_goal_reachable,
                "goal_transfer": self.goal_transfer, "notes": self.notes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def check_embedding_abstraction(P: StripsInstance, Pp: StripsInstance, m: Morphism,
                                cap: int = DEFAULT_CAP, verify: bool = True) -> AbstractionReport:
    """Compare the projection of ``P`` on the image of ``m`` with the state
    space of the embedded instance ``Pp``.

    Checks that ``b`` (the inverse of the fluent map composed with the
    projection) is a bijection between their states, that every
    non-reflexive abstract transition ``(t1, o, t2)`` is matched by the
    transition ``(b t1, nu o, b t2)``, and that goal reachability carries
    over from the abstraction to the embedded instance.
    """
    if m.kind is not Kind.SE:
        raise InvalidInput("an SE morphism is required")
    if verify:
        try:
            rep = verify_morphism(P, Pp, m)
        except ValueError as e:
            raise InvalidInput(str(e)) from None
        if not rep.ok:
            raise InvalidInput("; ".join(map(str, rep.violations)))
    ups = m.fluent_map
    E = sorted(set(ups))
    abstract = project_lts(P, E, cap)
    concrete = build_lts(Pp, cap)
    out = AbstractionReport()
    # b sends abstract bit for fluent ups[f'] to concrete bit f'
    pos = {f: k for k, f in enumerate(E)}
    if len(E) != len(ups) or abstract.n_states != concrete.n_states:
        out.bijection = False
        out.notes.append("fluent map is not injective on the embedded fluents")
        return out
    bit_of = {pos[ups[fp]]: fp for fp in range(Pp.n_fluents)}

    def b(t):
        return sum(1 << bit_of[k] for k in range(len(E)) if t >> k & 1)

    images = {b(t) for t in abstract.states}
    if len(images) != concrete.n_states:
        out.bijection = False
        out.notes.append("b is not a bijection")
        return out
    for t1, r, t2 in sorted(abstract.transitions):
        if t1 == t2:
            continue
        s = m.op_map[r]
        if s is None or (b(t1), s, b(t2)) not in concrete.transitions:
            out.transition_counterexamples.append({
                "abstract": [sorted(P.fluents[f] for f in abstract.as_set(t1)),
                             P.operators[r].name,
                             sorted(P.fluents[f] for f in abstract.as_set(t2))],
                "expected_label": None if s is None else Pp.operators[s].name,
            })
    out.abstract_goal_reachable = abstract.goal_reachable()
    out.embedded_goal_reachable = concrete.goal_reachable()
    return out
