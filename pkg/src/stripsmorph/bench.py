"""Corpus benchmark: every pair, every kind, with and without pruning.

A corpus is a directory of pair directories, each holding ``a.strips`` and
``b.strips`` (source/target for SI, SSI-H and SSI; host/embedded for SE).
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
from concurrent.futures import ProcessPoolExecutor

from .model import Kind
from .sat import SolverConfig
from .search import find_morphism
from .textio import read_instance, write_morphism

COLUMNS = [
    "pair", "kind", "result", "result_no_cp", "cp_time", "compile_time", "solve_time",
    "total_time", "no_cp_compile_time", "no_cp_solve_time", "no_cp_total_time",
    "clauses_with_cp", "clauses_without_cp", "simplified_fraction", "mapping_sha1",
]
TIMING_COLUMNS = {c for c in COLUMNS if c.endswith("_time")}


def list_pairs(corpus: str) -> list:
    if not os.path.isdir(corpus):
        raise FileNotFoundError(f"corpus directory {corpus!r} not found")
    out = []
    for name in sorted(os.listdir(corpus)):
        d = os.path.join(corpus, name)
        if os.path.isfile(os.path.join(d, "a.strips")) and os.path.isfile(os.path.join(d, "b.strips")):
            out.append(name)
    return out


def run_pair(task) -> dict:
    corpus, pair, kind, timeout, seed = task
    kind = Kind.parse(kind)
    A = read_instance(os.path.join(corpus, pair, "a.strips"))
    B = read_instance(os.path.join(corpus, pair, "b.strips"))
    cfg = SolverConfig(time_budget=timeout, seed=seed)
    with_cp = find_morphism(A, B, kind, cfg, use_cp=True)
    without = find_morphism(A, B, kind, cfg, use_cp=False)
    s1, s0 = with_cp.stats, without.stats
    # the unpruned encoding is exactly the no-cp run's formula
    baseline = 0 if s0.early_unsat else s0.clauses
    if s1.early_unsat:
        simp_frac = 1.0
    else:
        simp_frac = 0.0 if baseline == 0 else max(0.0, 1.0 - s1.clauses / baseline)
    digest = ""
    if with_cp.status == "found":
        text = write_morphism(A, B, with_cp.morphism)
        digest = hashlib.sha1(text.encode("utf-8")).hexdigest()
    return {
        "pair": pair, "kind": kind.value, "result": with_cp.status,
        "result_no_cp": without.status,
        "cp_time": s1.cp_time, "compile_time": s1.compile_time, "solve_time": s1.solve_time,
        "total_time": s1.total_time,
        "no_cp_compile_time": s0.cp_time + s0.compile_time, "no_cp_solve_time": s0.solve_time,
        "no_cp_total_time": s0.total_time,
        "clauses_with_cp": 0 if s1.early_unsat else s1.clauses,
        "clauses_without_cp": baseline, "simplified_fraction": simp_frac,
        "mapping_sha1": digest,
    }


def run_bench(corpus: str, kinds, timeout: float = 60.0, jobs: int = 1, seed: int = 0) -> list:
    pairs = list_pairs(corpus)
    tasks = [(corpus, p, Kind.parse(k).value, timeout, seed) for p in pairs for k in kinds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(run_pair, tasks))
    else:
        rows = [run_pair(t) for t in tasks]
    rows.sort(key=lambda r: (r["pair"], r["kind"]))
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def summarize(rows) -> list:
    """Per kind: pairs, solved with and without pruning, mean simplification, total times."""
    kinds = sorted({r["kind"] for r in rows})
    out = []
    for k in kinds:
        rs = [r for r in rows if r["kind"] == k]
        out.append({
            "kind": k, "pairs": len(rs),
            "solved_cp": sum(r["result"] != "timeout" for r in rs),
            "solved_no_cp": sum(r["result_no_cp"] != "timeout" for r in rs),
            "found": sum(r["result"] == "found" for r in rs),
            "avg_simplification": sum(r["simplified_fraction"] for r in rs) / len(rs),
            "time_cp": sum(r["total_time"] for r in rs),
            "time_no_cp": sum(r["no_cp_total_time"] for r in rs),
        })
    return out


def summary_table(summary) -> str:
    head = ["kind", "pairs", "CP", "NoCP", "found", "Av. Simp.", "time CP", "time NoCP"]
    lines = [head]
    for s in summary:
        lines.append([s["kind"], str(s["pairs"]), str(s["solved_cp"]), str(s["solved_no_cp"]),
                      str(s["found"]), f"{100 * s['avg_simplification']:.1f}%",
                      f"{s['time_cp']:.2f}s", f"{s['time_no_cp']:.2f}s"])
    if len(lines) == 1:
        lines.append(["(empty)", "0", "0", "0", "0", "0.0%", "0.00s", "0.00s"])
    widths = [max(len(row[i]) for row in lines) for i in range(len(head))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in lines)
