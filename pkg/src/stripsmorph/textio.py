"""Text formats: grounded instances, graphs, morphism JSON and DIMACS CNF.

Instance documents look like::

    instance P_ab
    fluents a b
    init a
    goal b
    op o1
      pre a
      add b
      del a
    end

``fluents`` may be repeated to continue the declaration; ``pre``/``add``/
``del`` may be repeated inside an operator block and accumulate.
"""

from __future__ import annotations

import json
import re

from .model import (
    DuplicateName,
    InconsistentEffect,
    Kind,
    Morphism,
    StripsInstance,
    UnknownFluent,
    morphism_from_names,
    morphism_to_names,
)

NAME_RE = re.compile(r"[A-Za-z0-9_()\-,]+\Z")


class SyntaxError(ValueError):  # noqa: A001 - deliberately mirrors the format's error name
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParseError(ValueError):
    pass


def _tokens(raw: str) -> list:
    return raw.split("#", 1)[0].split()


def _check_names(names, lineno):
    for n in names:
        if not NAME_RE.match(n):
            raise SyntaxError(lineno, f"invalid name {n!r}")


def parse_instance(text: str) -> StripsInstance:
    name = None
    fluents: list = []
    seen_fluents: set = set()
    init: list = []
    goal: list = []
    ops: list = []  # [name, pre, add, del]
    op_names: set = set()
    ended = False
    have_init = have_goal = False

    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = _tokens(raw)
        if not toks:
            continue
        if ended:
            raise SyntaxError(lineno, "content after 'end'")
        key, args = toks[0], toks[1:]
        _check_names(args, lineno)
        if key == "instance":
            if name is not None or len(args) != 1:
                raise SyntaxError(lineno, "expected a single 'instance NAME' header")
            name = args[0]
            continue
        if name is None:
            raise SyntaxError(lineno, "document must start with 'instance NAME'")
        if key == "fluents":
            if ops or have_init or have_goal:
                raise SyntaxError(lineno, "fluents must be declared before init/goal/op")
            for f in args:
                if f in seen_fluents:
                    raise DuplicateName(f)
                seen_fluents.add(f)
                fluents.append(f)
        elif key == "init":
            if ops:
                raise SyntaxError(lineno, "init must precede operators")
            have_init = True
            init.extend(args)
        elif key == "goal":
            if ops:
                raise SyntaxError(lineno, "goal must precede operators")
            have_goal = True
            goal.extend(args)
        elif key == "op":
            if len(args) != 1:
                raise SyntaxError(lineno, "expected 'op NAME'")
            if args[0] in op_names:
                raise DuplicateName(args[0])
            op_names.add(args[0])
            ops.append([args[0], [], [], []])
        elif key in ("pre", "add", "del"):
            if not ops:
                raise SyntaxError(lineno, f"'{key}' outside an operator block")
            ops[-1][("pre", "add", "del").index(key) + 1].extend(args)
        elif key == "end":
            if args:
                raise SyntaxError(lineno, "'end' takes no arguments")
            ended = True
        else:
            raise SyntaxError(lineno, f"unknown keyword {key!r}")
    if name is None:
        raise SyntaxError(1, "empty document")
    if not ended:
        raise SyntaxError(len(text.splitlines()), "missing 'end'")
    for group in [init, goal] + [x for o in ops for x in o[1:]]:
        for f in group:
            if f not in seen_fluents:
                raise UnknownFluent(f)
    for o in ops:
        if set(o[2]) & set(o[3]):
            raise InconsistentEffect(o[0])
    return StripsInstance.from_names(fluents, init, goal, [tuple(o) for o in ops], name=name)


def _line(key, names):
    return " ".join([key] + list(names))


def write_instance(P: StripsInstance) -> str:
    """Canonical form: one line per section, sets listed in id order."""
    out = [f"instance {P.name}", _line("fluents", P.fluents),
           _line("init", P.names(P.init)), _line("goal", P.names(P.goal))]
    for o in P.operators:
        out.append(f"op {o.name}")
        out.append("  " + _line("pre", P.names(o.pre)))
        out.append("  " + _line("add", P.names(o.add)))
        out.append("  " + _line("del", P.names(o.delete)))
    out.append("end")
    return "\n".join(out) + "\n"


def read_instance(path) -> StripsInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


# -- graphs ---------------------------------------------------------------

def parse_graph(text: str):
    from .graphs import Graph

    directed = None
    vertices: list = []
    index: dict = {}
    edges: list = []

    def vid(name):
        if name not in index:
            index[name] = len(vertices)
            vertices.append(name)
        return index[name]

    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = _tokens(raw)
        if not toks:
            continue
        if directed is None:
            if toks not in (["directed"], ["undirected"]):
                raise SyntaxError(lineno, "first line must be 'directed' or 'undirected'")
            directed = toks[0] == "directed"
            continue
        _check_names(toks[1:], lineno)
        if toks[0] == "edge" and len(toks) == 3:
            edges.append((vid(toks[1]), vid(toks[2])))
        elif toks[0] == "vertex" and len(toks) == 2:
            vid(toks[1])
        else:
            raise SyntaxError(lineno, f"cannot parse {raw.strip()!r}")
    if directed is None:
        raise SyntaxError(1, "empty graph document")
    return Graph(len(vertices), directed, edges, names=tuple(vertices))


def write_graph(g) -> str:
    out = ["directed" if g.directed else "undirected"]
    touched = set()
    for u, v in sorted(g.edges):
        touched.update((u, v))
        out.append(f"edge {g.names[u]} {g.names[v]}")
    for u in range(g.n):
        if u not in touched:
            out.append(f"vertex {g.names[u]}")
    return "\n".join(out) + "\n"


# -- morphisms ------------------------------------------------------------

def write_morphism(P: StripsInstance, P2: StripsInstance, m: Morphism) -> str:
    fm, om = morphism_to_names(P, P2, m)
    doc = {"kind": m.kind.value, "fluent_map": fm, "op_map": om}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def parse_morphism(text: str, P: StripsInstance, P2: StripsInstance) -> Morphism:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid morphism JSON: {e}") from None
    if not isinstance(doc, dict) or not {"kind", "fluent_map", "op_map"} <= doc.keys():
        raise ParseError("morphism JSON needs kind, fluent_map and op_map")
    try:
        kind = Kind.parse(doc["kind"])
    except ValueError as e:
        raise ParseError(str(e)) from None
    fm, om = doc["fluent_map"], doc["op_map"]
    if not isinstance(fm, dict) or not isinstance(om, dict):
        raise ParseError("fluent_map and op_map must be objects")
    try:
        return morphism_from_names(P, P2, kind, fm, om)
    except (KeyError, UnknownFluent) as e:
        raise ParseError(f"morphism references an unknown name: {e}") from None


# -- DIMACS ---------------------------------------------------------------

def write_dimacs(formula) -> str:
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    for c in formula.clauses:
        lines.append(" ".join(map(str, list(c) + [0])))
    return "\n".join(lines)


def parse_dimacs(text: str):
    """Parse a DIMACS CNF into ``(num_vars, clauses)``."""
    num_vars = None
    clauses: list = []
    cur: list = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"bad header {line!r}")
            num_vars = int(parts[2])
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}") from None
            if lit == 0:
                clauses.append(tuple(cur))
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(tuple(cur))
    if num_vars is None:
        raise ParseError("missing 'p cnf' header")
    return num_vars, clauses


def parse_model(text: str) -> dict:
    """Read solver ``v ...`` lines into ``{var: bool}``."""
    model: dict = {}
    saw_v = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line.startswith("v"):
            continue
        saw_v = True
        for tok in line[1:].split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r} in model line") from None
            if lit == 0:
                continue
            v = abs(lit)
            if v in model and model[v] != (lit > 0):
                raise ParseError(f"variable {v} assigned both ways")
            model[v] = lit > 0
    if not saw_v:
        raise ParseError("no 'v' lines in solver output")
    return model
