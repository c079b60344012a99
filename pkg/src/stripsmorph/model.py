"""Core STRIPS types, operator semantics, plan validation and morphism checks.

Fluents and operators are referred to by dense integer ids; names only live
in the instance tables.  All objects are immutable once built.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

State = frozenset  # a set of fluent ids that are currently true
Plan = tuple  # a sequence of operator ids


class ModelError(ValueError):
    """Base class for invalid STRIPS data."""


class InconsistentEffect(ModelError):
    def __init__(self, op: str):
        super().__init__(f"operator {op!r} adds and deletes the same fluent")
        self.op = op


class DuplicateName(ModelError):
    def __init__(self, name: str):
        super().__init__(f"duplicate name {name!r}")
        self.name = name


class UnknownFluent(ModelError):
    def __init__(self, name):
        super().__init__(f"unknown fluent {name!r}")
        self.name = name


class NotApplicable(ModelError):
    pass


class ShapeMismatch(ModelError):
    """A morphism's maps do not have the shape its kind requires."""


class InvalidMorphism(ModelError):
    pass


class Kind(str, enum.Enum):
    SI = "si"
    SSIH = "ssih"
    SSI = "ssi"
    SE = "se"

    @classmethod
    def parse(cls, value) -> "Kind":
        if isinstance(value, Kind):
            return value
        try:
            return cls(str(value).lower().replace("-", ""))
        except ValueError:
            raise ValueError(f"unknown morphism kind {value!r}") from None


@dataclass(frozen=True)
class Operator:
    name: str
    pre: frozenset = frozenset()
    add: frozenset = frozenset()
    delete: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pre", frozenset(self.pre))
        object.__setattr__(self, "add", frozenset(self.add))
        object.__setattr__(self, "delete", frozenset(self.delete))
        if self.add & self.delete:
            raise InconsistentEffect(self.name)

    @property
    def effect_vars(self) -> frozenset:
        return self.add | self.delete

    @property
    def mentioned(self) -> frozenset:
        return self.pre | self.add | self.delete

    def part(self, which: str) -> frozenset:
        """Return ``pre``, ``add`` or ``del`` by name."""
        return _PARTS[which](self)

    def same_structure(self, other: "Operator") -> bool:
        return (self.pre, self.add, self.delete) == (other.pre, other.add, other.delete)


_PARTS = {
    "pre": lambda o: o.pre,
    "add": lambda o: o.add,
    "del": lambda o: o.delete,
}
PARTS = ("pre", "add", "del")
EFFECT_PARTS = ("add", "del")


@dataclass(frozen=True)
class StripsInstance:
    """A grounded STRIPS instance ``<F, I, O, G>``."""

    fluents: tuple
    init: frozenset
    goal: frozenset
    operators: tuple
    name: str = "instance"
    _fluent_index: dict = field(default=None, init=False, repr=False, compare=False)
    _op_index: dict = field(default=None, init=False, repr=False, compare=False)
    _mentions: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fluents", tuple(self.fluents))
        object.__setattr__(self, "operators", tuple(self.operators))
        object.__setattr__(self, "init", frozenset(self.init))
        object.__setattr__(self, "goal", frozenset(self.goal))
        index = {}
        for i, f in enumerate(self.fluents):
            if f in index:
                raise DuplicateName(f)
            index[f] = i
        ops = {}
        for r, o in enumerate(self.operators):
            if o.name in ops:
                raise DuplicateName(o.name)
            ops[o.name] = r
        n = len(self.fluents)
        for s in (self.init, self.goal):
            for f in s:
                if not 0 <= f < n:
                    raise UnknownFluent(f)
        mentions = [[] for _ in range(n)]
        for r, o in enumerate(self.operators):
            for f in o.mentioned:
                if not 0 <= f < n:
                    raise UnknownFluent(f)
                mentions[f].append(r)
        object.__setattr__(self, "_fluent_index", index)
        object.__setattr__(self, "_op_index", ops)
        object.__setattr__(self, "_mentions", tuple(tuple(m) for m in mentions))

    @classmethod
    def from_names(cls, fluents, init, goal, operators, name="instance"):
        """Build an instance where sets are given by fluent name.

        ``operators`` is an iterable of ``(name, pre, add, del)`` tuples.
        """
        fluents = tuple(fluents)
        idx = {}
        for i, f in enumerate(fluents):
            if f in idx:
                raise DuplicateName(f)
            idx[f] = i

        def ids(names):
            out = set()
            for x in names:
                if x not in idx:
                    raise UnknownFluent(x)
                out.add(idx[x])
            return frozenset(out)

        ops = tuple(Operator(n, ids(p), ids(a), ids(d)) for n, p, a, d in operators)
        return cls(fluents, ids(init), ids(goal), ops, name=name)

    @property
    def n_fluents(self) -> int:
        return len(self.fluents)

    @property
    def n_operators(self) -> int:
        return len(self.operators)

    def fluent_id(self, name: str) -> int:
        try:
            return self._fluent_index[name]
        except KeyError:
            raise UnknownFluent(name) from None

    def op_id(self, name: str) -> int:
        try:
            return self._op_index[name]
        except KeyError:
            raise KeyError(f"unknown operator {name!r}") from None

    def depending(self, f: int) -> tuple:
        """Operators whose precondition or effect mentions fluent ``f``."""
        return self._mentions[f]

    def names(self, fluent_ids: Iterable[int]) -> list:
        return [self.fluents[i] for i in sorted(fluent_ids)]


def is_applicable(s: State, o: Operator) -> bool:
    return o.pre <= s


def apply_operator(s: State, o: Operator) -> State:
    if not o.pre <= s:
        raise NotApplicable(f"{o.name} is not applicable")
    return frozenset((s - o.delete) | o.add)


def validate_plan(P: StripsInstance, plan: Sequence[int], as_solution: bool = False) -> bool:
    s = P.init
    for r in plan:
        o = P.operators[r]
        if not o.pre <= s:
            return False
        s = (s - o.delete) | o.add
    return P.goal <= s if as_solution else True


@dataclass(frozen=True)
class Morphism:
    """A fluent map and an operator map between two instances.

    For SI/SSI-H/SSI ``fluent_map[f]`` is the image in the second instance of
    fluent ``f`` of the first.  For SE the first instance is the large one
    ``P`` and the second the embedded ``P'``; ``fluent_map`` is indexed by the
    fluents of ``P'`` and points into ``P``, while ``op_map`` is indexed by
    the operators of ``P`` and points into ``P'`` (``None`` where undefined).
    """

    kind: Kind
    fluent_map: tuple
    op_map: tuple
    source: str = ""
    target: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        object.__setattr__(self, "fluent_map", tuple(self.fluent_map))
        object.__setattr__(self, "op_map", tuple(self.op_map))

    def inverse(self) -> "Morphism":
        """Inverse of a bijective SI morphism."""
        if self.kind is not Kind.SI:
            raise ValueError("only SI morphisms are invertible")
        fm = [None] * len(self.fluent_map)
        for i, j in enumerate(self.fluent_map):
            fm[j] = i
        om = [None] * len(self.op_map)
        for r, s in enumerate(self.op_map):
            om[s] = r
        return Morphism(Kind.SI, tuple(fm), tuple(om), self.target, self.source)


@dataclass(frozen=True)
class Violation:
    name: str
    detail: str = ""

    def __str__(self):
        return f"{self.name}: {self.detail}" if self.detail else self.name


@dataclass
class VerifyReport:
    kind: Kind
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def add(self, name, detail=""):
        self.violations.append(Violation(name, detail))

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "valid": self.ok,
                "violations": [{"name": v.name, "detail": v.detail} for v in self.violations]}


def _check_map(values, size_out, total, what):
    for x in values:
        if x is None:
            if total:
                raise ShapeMismatch(f"{what} map is not total")
        elif not (isinstance(x, int) and 0 <= x < size_out):
            raise ShapeMismatch(f"{what} map has out-of-range image {x!r}")


def _image(fmap, fs):
    return frozenset(fmap[f] for f in fs)


def _duplicates(values):
    seen, dup = set(), set()
    for x in values:
        if x is None:
            continue
        if x in seen:
            dup.add(x)
        seen.add(x)
    return dup


def active_operators(P: StripsInstance, image: frozenset) -> list:
    """Operators of ``P`` whose effect touches the fluent set ``image``."""
    return [r for r, o in enumerate(P.operators) if o.effect_vars & image]


def verify_morphism(P: StripsInstance, P2: StripsInstance, m: Morphism) -> VerifyReport:
    """Check every defining condition of ``m`` and list the failed ones.

    Raises ShapeMismatch when the maps have the wrong length, reference ids
    out of range, or are partial where the kind needs total maps.
    Injectivity and surjectivity failures are reported, not raised.
    """
    if m.kind is Kind.SE:
        return _verify_embedding(P, P2, m)
    if len(m.fluent_map) != P.n_fluents or len(m.op_map) != P.n_operators:
        raise ShapeMismatch("map lengths do not match the source instance")
    _check_map(m.fluent_map, P2.n_fluents, True, "fluent")
    _check_map(m.op_map, P2.n_operators, True, "operator")
    rep = VerifyReport(m.kind)
    ups, nu = m.fluent_map, m.op_map
    for j in sorted(_duplicates(ups)):
        rep.add("fluent_injectivity", f"several fluents map to {P2.fluents[j]}")
    # operator injectivity is enforced for every kind except SE
    for s in sorted(_duplicates(nu)):
        rep.add("op_injectivity", f"several operators map to {P2.operators[s].name}")
    for r, o in enumerate(P.operators):
        o2 = P2.operators[nu[r]]
        for part in PARTS:
            if _image(ups, o.part(part)) != o2.part(part):
                rep.add(f"morphism[{o.name}]", f"{part} differs from {o2.name}")
    if m.kind in (Kind.SI, Kind.SSI):
        if _image(ups, P.init) != P2.init:
            rep.add("init", "image of I differs from I'")
        if _image(ups, P.goal) != P2.goal:
            rep.add("goal", "image of G differs from G'")
    if m.kind is Kind.SI:
        if len(set(ups)) != P2.n_fluents:
            rep.add("fluent_surjectivity", "fluent map is not onto")
        if len(set(nu)) != P2.n_operators:
            rep.add("op_surjectivity", "operator map is not onto")
    return rep


def _verify_embedding(P: StripsInstance, Pp: StripsInstance, m: Morphism) -> VerifyReport:
    # P is the large instance, Pp the embedded one
    if len(m.fluent_map) != Pp.n_fluents or len(m.op_map) != P.n_operators:
        raise ShapeMismatch("embedding maps must be indexed by F' and O")
    _check_map(m.fluent_map, P.n_fluents, True, "fluent")
    _check_map(m.op_map, Pp.n_operators, False, "operator")
    rep = VerifyReport(Kind.SE)
    ups, nu = m.fluent_map, m.op_map
    for i in sorted(_duplicates(ups)):
        rep.add("fluent_injectivity", f"several fluents map to {P.fluents[i]}")
    image = frozenset(ups)
    for r in active_operators(P, image):
        o = P.operators[r]
        if nu[r] is None:
            rep.add(f"active_coverage[{o.name}]", "active operator has no image")
            continue
        o2 = Pp.operators[nu[r]]
        if _image(ups, o2.add) != o.add & image:
            rep.add(f"eff_add[{o.name}]", f"add effects differ from {o2.name}")
        if _image(ups, o2.delete) != o.delete & image:
            rep.add(f"eff_del[{o.name}]", f"delete effects differ from {o2.name}")
        if not _image(ups, o2.pre) <= o.pre & image:
            rep.add(f"pre_inclusion[{o.name}]", f"precondition of {o2.name} not included")
    if not _image(ups, Pp.goal) <= P.goal & image:
        rep.add("goal_inclusion", "image of G' not included in G")
    if not _image(ups, Pp.init) >= P.init & image:
        rep.add("init_superset", "image of I' does not cover I on the embedded fluents")
    return rep


def translate_plan(P: StripsInstance, P2: StripsInstance, m: Morphism,
                   plan: Sequence[int]) -> tuple:
    """Carry a plan across a verified morphism.

    For SI/SSI/SSI-H the plan belongs to ``P`` and is mapped into ``P2``.
    For SE the plan belongs to the large instance ``P``; operators that do
    not touch the embedded fluents are dropped and the rest are mapped into
    ``P2``.
    """
    rep = verify_morphism(P, P2, m)
    if not rep.ok:
        raise InvalidMorphism("; ".join(map(str, rep.violations)))
    if m.kind is Kind.SE:
        image = frozenset(m.fluent_map)
        return tuple(m.op_map[r] for r in plan
                     if P.operators[r].effect_vars & image)
    return tuple(m.op_map[r] for r in plan)


def ids_to_names(P: StripsInstance, plan: Sequence[int]) -> list:
    return [P.operators[r].name for r in plan]


def morphism_from_names(P: StripsInstance, P2: StripsInstance, kind, fluent_map: dict,
                        op_map: dict) -> Morphism:
    """Build a Morphism from name dictionaries (see textio for the format)."""
    kind = Kind.parse(kind)
    if kind is Kind.SE:
        dom_f, cod_f = P2, P
    else:
        dom_f, cod_f = P, P2
    fm: list = [None] * dom_f.n_fluents
    for a, b in fluent_map.items():
        fm[dom_f.fluent_id(a)] = cod_f.fluent_id(b)
    om: list = [None] * P.n_operators
    for a, b in op_map.items():
        om[P.op_id(a)] = P2.op_id(b)
    return Morphism(kind, tuple(fm), tuple(om), P.name, P2.name)


def morphism_to_names(P: StripsInstance, P2: StripsInstance, m: Morphism) -> tuple:
    if m.kind is Kind.SE:
        dom_f, cod_f = P2, P
    else:
        dom_f, cod_f = P, P2
    fm = {dom_f.fluents[i]: cod_f.fluents[j]
          for i, j in enumerate(m.fluent_map) if j is not None}
    om = {P.operators[r].name: P2.operators[s].name
          for r, s in enumerate(m.op_map) if s is not None}
    return fm, om


def optional_ids(values: Iterable[Optional[int]]) -> tuple:
    return tuple(values)
