"""``strips-morph`` command line.

Exit codes for check/oracle: 10 found, 20 no morphism, 30 timeout, 1 input
error.  verify and statespace exit 0 when everything holds and 20 otherwise.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import bench as benchmod
from .encode import encode_cnf, simplification_stats
from .generators import positive_pair
from .graphs import Graph, encode_graph, random_graph, reduce_independent_set
from .model import Kind, ModelError, Morphism
from .propagate import EarlyUnsat, prune
from .sat import SOLVER_ENV, ExternalSolverFailure, SolverConfig
from .search import TooLarge, brute_force, find_morphism
from .statespace import build_lts, check_embedding_abstraction
from .textio import (
    ParseError,
    SyntaxError as FormatError,
    parse_morphism,
    read_instance,
    write_dimacs,
    write_graph,
    write_instance,
    write_morphism,
)

EXIT_FOUND, EXIT_NONE, EXIT_TIMEOUT, EXIT_INPUT = 10, 20, 30, 1
RESULT_EXIT = {"found": EXIT_FOUND, "none": EXIT_NONE, "timeout": EXIT_TIMEOUT}


class InputError(Exception):
    pass


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_pair(args):
    try:
        return read_instance(args.a), read_instance(args.b)
    except OSError as e:
        raise InputError(f"cannot read instance: {e}") from None


def _solver_config(args) -> SolverConfig:
    path = getattr(args, "solver", None)
    if path is None:
        path = os.environ.get(SOLVER_ENV)
    backend = "external" if path and path != "internal" else "internal"
    return SolverConfig(backend=backend, time_budget=args.timeout, seed=args.seed,
                        solver_path=path if backend == "external" else None)


def _report_result(res, A, B, args):
    # the mapping/stats artifacts are written before the exit status is decided
    if res.status == "found" and args.out:
        _write(args.out, write_morphism(A, B, res.morphism))
    if getattr(args, "stats", None) and res.stats is not None:
        _write(args.stats, res.stats.to_json() + "\n")
    print(f"result: {res.status}")
    if res.status == "found" and not args.out:
        sys.stdout.write(write_morphism(A, B, res.morphism))
    elif res.status == "none" and getattr(res, "reason", ""):
        print(f"reason: {res.reason}")
    if res.stats is not None and not args.quiet:
        print(res.stats.to_table())
    return RESULT_EXIT[res.status]


def cmd_check(args) -> int:
    A, B = _load_pair(args)
    res = find_morphism(A, B, args.kind, _solver_config(args), use_cp=not args.no_cp,
                        baseline=args.stats is not None)
    return _report_result(res, A, B, args)


def cmd_oracle(args) -> int:
    A, B = _load_pair(args)
    try:
        res = brute_force(A, B, args.kind)
    except TooLarge as e:
        raise InputError(str(e)) from None
    return _report_result(res, A, B, args)


def _load_mapping(path, A, B, kind):
    try:
        with open(path, encoding="utf-8") as fh:
            m = parse_morphism(fh.read(), A, B)
    except OSError as e:
        raise InputError(f"cannot read mapping: {e}") from None
    if kind is not None and Kind.parse(kind) is not m.kind:
        raise InputError(f"mapping kind {m.kind.value} differs from --kind {kind}")
    return m


def cmd_verify(args) -> int:
    from .model import verify_morphism

    A, B = _load_pair(args)
    m = _load_mapping(args.mapping, A, B, args.kind)
    rep = verify_morphism(A, B, m)
    if args.report:
        _write(args.report, json.dumps(rep.to_dict(), indent=2) + "\n")
    if rep.ok:
        print(f"valid {m.kind.value} morphism")
        return 0
    print(f"invalid {m.kind.value} morphism:")
    for v in rep.violations:
        print(f"  {v}")
    return EXIT_NONE


def cmd_encode(args) -> int:
    A, B = _load_pair(args)
    kind = Kind.parse(args.kind)
    dt = prune(A, B, kind, not args.no_cp)
    if isinstance(dt, EarlyUnsat):
        from .encode import CnfFormula
        formula = CnfFormula(0, [()])
        print(f"early_unsat={dt.reason}")
    else:
        formula = encode_cnf(A, B, dt)
    if args.dimacs:
        _write(args.dimacs, write_dimacs(formula) + "\n")
    stats = simplification_stats(A, B, dt, kind)
    info = {"variables": formula.num_vars, "clauses": len(formula.clauses)}
    info.update(stats.to_dict())
    for k, v in info.items():
        print(f"{k}={v}")
    if args.stats:
        _write(args.stats, json.dumps(info, indent=2) + "\n")
    return 0


def cmd_statespace(args) -> int:
    A, B = _load_pair(args)
    m = _load_mapping(args.mapping, A, B, "se")
    rep = check_embedding_abstraction(A, B, m, cap=args.cap)
    text = rep.to_json() + "\n"
    if args.report:
        _write(args.report, text)
    else:
        sys.stdout.write(text)
    if args.dot:
        _write(args.dot, build_lts(B, args.cap).to_dot(B))
    return 0 if rep.ok else EXIT_NONE


# -- generators ------------------------------------------------------------------

def _parse_vertex(tok: str) -> int:
    t = tok[1:] if tok.startswith("v") else tok
    try:
        k = int(t)
    except ValueError:
        raise InputError(f"bad vertex {tok!r}") from None
    if k < 1:
        raise InputError(f"vertices are numbered from 1, got {tok!r}")
    return k - 1


def _parse_edges(spec: str, n: int):
    edges = []
    for part in filter(None, (spec or "").split(",")):
        if "-" not in part:
            raise InputError(f"bad edge {part!r}; use u-v")
        u, v = part.split("-", 1)
        u, v = _parse_vertex(u), _parse_vertex(v)
        if u >= n or v >= n:
            raise InputError(f"edge {part!r} uses a vertex beyond --n {n}")
        edges.append((u, v))
    return edges


def _graph_from_args(args, n=None, seed_offset=0) -> Graph:
    n = args.n if n is None else n
    if n < 0:
        raise InputError("--n must be non-negative")
    directed = getattr(args, "directed", False)
    if args.edges is not None:
        return Graph(n, directed, _parse_edges(args.edges, n))
    rng = random.Random(args.seed + seed_offset)
    return random_graph(rng, n, args.p, directed)


def _pair_out(args, A, B, witness=None):
    out = args.out_dir
    os.makedirs(out, exist_ok=True)
    _write(os.path.join(out, "a.strips"), write_instance(A))
    _write(os.path.join(out, "b.strips"), write_instance(B))
    if witness is not None:
        _write(os.path.join(out, "witness.json"), write_morphism(A, B, witness))
    print(f"wrote {out}")


def cmd_gen(args) -> int:
    what = args.what
    if what == "graph":
        g = _graph_from_args(args)
        P = encode_graph(g, name=args.name)
        _write(args.out, write_instance(P))
        if args.graph_out:
            _write(args.graph_out, write_graph(g))
        return 0
    if what == "indepset":
        if args.k is None:
            raise InputError("indepset needs --k")
        g = _graph_from_args(args)
        if any(u == v for u, v in g.edges):
            raise InputError("the independent-set reduction rejects self-loops")
        if not 1 <= args.k <= g.n:
            raise InputError(f"--k must lie in 1..{g.n}")
        P, Pp = reduce_independent_set(g, args.k)
        _pair_out(args, P, Pp)
        return 0
    if what == "matching":
        small = _graph_from_args(args, n=args.n)
        large = _graph_from_args(argparse.Namespace(**{**vars(args), "edges": args.edges2}),
                                 n=args.m if args.m is not None else args.n, seed_offset=1)
        _pair_out(args, encode_graph(small, "small"), encode_graph(large, "large"))
        return 0
    if what == "positive-pair":
        if args.fluents < 1 or args.ops < 0:
            raise InputError("--fluents must be >= 1 and --ops >= 0")
        if args.count is None:
            A, B, w = positive_pair(args.seed, args.kind, args.fluents, args.ops,
                                    structured=args.structured)
            _pair_out(args, A, B, w)
            return 0
        base = args.out_dir
        for i in range(args.count):
            A, B, w = positive_pair(args.seed * 100003 + i, args.kind, args.fluents, args.ops,
                                    structured=args.structured)
            args.out_dir = os.path.join(base, f"pair{i:03d}")
            _pair_out(args, A, B, w)
        return 0
    raise InputError(f"unknown generator {what!r}")


def cmd_bench(args) -> int:
    kinds = [Kind.parse(k) for k in args.kinds.split(",") if k]
    try:
        rows = benchmod.run_bench(args.corpus, kinds, args.timeout, args.jobs, args.seed)
    except OSError as e:
        raise InputError(str(e)) from None
    _write(args.csv, benchmod.rows_to_csv(rows))
    summary = benchmod.summarize(rows)
    if args.summary:
        _write(args.summary, json.dumps(summary, indent=2) + "\n")
    if args.csv not in (None, "-"):
        print(benchmod.summary_table(summary))
    return 0


# -- parser --------------------------------------------------------------------------

def _pair_args(p, kind=True, kind_required=True):
    if kind:
        p.add_argument("--kind", required=kind_required, choices=[k.value for k in Kind])
    p.add_argument("a", help="first instance (source, or host for se)")
    p.add_argument("b", help="second instance (target, or embedded instance for se)")


def _solve_args(p):
    p.add_argument("--no-cp", action="store_true", help="skip constraint propagation")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--solver", default=None,
                   help=f"external DIMACS solver (default: ${SOLVER_ENV}; 'internal' forces "
                        "the built-in solver)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="strips-morph",
                                 description="Find and check morphisms between STRIPS instances.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="search for a morphism")
    _pair_args(p)
    _solve_args(p)
    p.add_argument("--out", help="write the mapping JSON here")
    p.add_argument("--stats", help="write run statistics JSON here")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", help="exhaustive search on small instances")
    _pair_args(p)
    p.add_argument("--out")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_oracle, stats=None)

    p = sub.add_parser("verify", help="check a mapping file")
    _pair_args(p, kind_required=False)
    p.add_argument("mapping")
    p.add_argument("--report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("encode", help="write the CNF encoding")
    _pair_args(p)
    p.add_argument("--no-cp", action="store_true")
    p.add_argument("--dimacs", help="DIMACS output path")
    p.add_argument("--stats")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("statespace", help="check an embedding against its projection")
    _pair_args(p, kind=False)
    p.add_argument("mapping")
    p.add_argument("--cap", type=int, default=15)
    p.add_argument("--report")
    p.add_argument("--dot", help="write the embedded instance's LTS as DOT")
    p.set_defaults(func=cmd_statespace)

    p = sub.add_parser("gen", help="generate instances and pairs")
    p.add_argument("what", choices=["graph", "indepset", "matching", "positive-pair"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=4, help="vertices")
    p.add_argument("--m", type=int, default=None, help="vertices of the larger graph (matching)")
    p.add_argument("--edges", default=None, help="edge list like 1-2,2-3 (default: random)")
    p.add_argument("--edges2", default=None, help="edge list of the larger graph (matching)")
    p.add_argument("--p", type=float, default=0.4, help="edge probability for random graphs")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--directed", action="store_true")
    g.add_argument("--undirected", action="store_true")
    p.add_argument("--k", type=int)
    p.add_argument("--kind", default="ssi", choices=[k.value for k in Kind])
    p.add_argument("--fluents", type=int, default=6)
    p.add_argument("--ops", type=int, default=6)
    p.add_argument("--structured", action="store_true",
                   help="planning-like base instances instead of uniform random ones")
    p.add_argument("--count", type=int, default=None, help="write a corpus of this many pairs")
    p.add_argument("--name", default="graph")
    p.add_argument("--out", default="-", help="instance output for 'graph'")
    p.add_argument("--graph-out", default=None)
    p.add_argument("--out-dir", default="pair", help="pair output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run a corpus with and without propagation")
    p.add_argument("--corpus", required=True)
    p.add_argument("--kinds", default="ssi,ssih,se")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default="-")
    p.add_argument("--summary", default=None)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ModelError, FormatError, ParseError, ExternalSolverFailure,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
