"""SAT backends: a built-in CDCL solver and a client for external solvers.

The internal solver uses two watched literals, first-UIP clause learning,
VSIDS branching with phase saving, Luby restarts and LBD-based deletion of
learnt clauses.  Literals are stored as ``2*v`` (positive) and ``2*v + 1``
(negative).
"""

from __future__ import annotations

import heapq
import os
import random
import subprocess
import tempfile
import time
from dataclasses import dataclass, field

from .textio import ParseError, parse_model, write_dimacs

SOLVER_ENV = "STRIPS_MORPH_SOLVER"


class ExternalSolverFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    backend: str = "internal"  # "internal" or "external"
    time_budget: float = 60.0
    seed: int = 0
    solver_path: str = None

    def __post_init__(self):
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time budget must be positive")
        if self.backend not in ("internal", "external"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass
class SolveResult:
    status: str  # "sat", "unsat" or "timeout"
    model: dict = None
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == "sat"


def check_model(formula, assignment: dict) -> bool:
    """True iff every clause has a literal made true by ``assignment``."""
    for c in formula.clauses:
        if not any(assignment.get(abs(l), False) == (l > 0) for l in c):
            return False
    return True


def _luby(i: int) -> int:
    # i-th element (0-based) of 1 1 2 1 1 2 4 ...
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class _Timeout(Exception):
    pass


class CdclSolver:
    def __init__(self, num_vars: int, clauses, seed: int = 0):
        self.n = num_vars
        n2 = 2 * (num_vars + 1)
        self.lv = [0] * n2  # literal value: 1 true, -1 false, 0 unassigned
        self.level = [0] * (num_vars + 1)
        self.reason = [None] * (num_vars + 1)
        self.trail: list = []
        self.trail_lim: list = []
        self.qhead = 0
        self.clauses: list = []
        self.learnt_meta: dict = {}  # clause index -> lbd
        self.watches = [[] for _ in range(n2)]
        rng = random.Random(seed)
        self.activity = [0.0] + [rng.random() * 1e-5 for _ in range(num_vars)]
        self.inc = 1.0
        self.phase = [False] * (num_vars + 1)
        self.heap = [(-self.activity[v], v) for v in range(1, num_vars + 1)]
        heapq.heapify(self.heap)
        self.ok = True
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        for c in clauses:
            self._add_input(c)

    # -- setup ---------------------------------------------------------------

    def _add_input(self, c):
        if not self.ok:
            return
        lits = set()
        for x in c:
            v = abs(x)
            if not 1 <= v <= self.n:
                raise ValueError(f"literal {x} out of range")
            lits.add(2 * v + (x < 0))
        if any(l ^ 1 in lits for l in lits):
            return  # tautology
        lits = sorted(lits)
        if not lits:
            self.ok = False
            return
        if len(lits) == 1:
            l = lits[0]
            if self.lv[l] == -1:
                self.ok = False
            elif self.lv[l] == 0:
                self._assign(l, None)
            return
        ci = len(self.clauses)
        self.clauses.append(lits)
        self.watches[lits[0]].append(ci)
        self.watches[lits[1]].append(ci)

    # -- core ----------------------------------------------------------------

    def _assign(self, l, reason):
        self.lv[l] = 1
        self.lv[l ^ 1] = -1
        v = l >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(l)

    def _propagate(self):
        lv, clauses, watches = self.lv, self.clauses, self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            keep = []
            n_ws = len(ws)
            k = 0
            while k < n_ws:
                ci = ws[k]
                k += 1
                c = clauses[ci]
                if c is None:
                    continue
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                if lv[first] == 1:
                    keep.append(ci)
                    continue
                moved = False
                for m in range(2, len(c)):
                    if lv[c[m]] != -1:
                        c[1], c[m] = c[m], false_lit
                        watches[c[1]].append(ci)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(ci)
                if lv[first] == -1:
                    keep.extend(ws[k:])
                    watches[false_lit] = keep
                    return ci
                self.propagations += 1
                self._assign(first, ci)
            watches[false_lit] = keep
        return None

    def _bump(self, v):
        a = self.activity[v] + self.inc
        self.activity[v] = a
        if a > 1e100:
            self.activity = [x * 1e-100 for x in self.activity]
            self.inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.n + 1)
                         if self.lv[2 * u] == 0]
            heapq.heapify(self.heap)
        else:
            heapq.heappush(self.heap, (-a, v))

    def _analyze(self, confl):
        seen = self._seen
        level, reason, trail = self.level, self.reason, self.trail
        cur = len(self.trail_lim)
        learnt = [0]
        counter = 0
        p = None
        idx = len(trail) - 1
        c = self.clauses[confl]
        to_clear = []
        while True:
            start = 0 if p is None else 1
            for q in c[start:]:
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    to_clear.append(v)
                    self._bump(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            confl = reason[p >> 1]
            c = self.clauses[confl]
        learnt[0] = p ^ 1
        # drop literals implied by the rest of the clause (local minimisation)
        out = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None:
                out.append(q)
                continue
            rc = self.clauses[r]
            if not all(seen[x >> 1] or level[x >> 1] == 0 for x in rc[1:]):
                out.append(q)
        for v in to_clear:
            seen[v] = False
        if len(out) == 1:
            bt = 0
        else:
            best = max(range(1, len(out)), key=lambda i: level[out[i] >> 1])
            out[1], out[best] = out[best], out[1]
            bt = level[out[1] >> 1]
        lbd = len({level[x >> 1] for x in out})
        return out, bt, lbd

    def _cancel_until(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        lim = self.trail_lim[lvl]
        lv, phase, act, heap = self.lv, self.phase, self.activity, self.heap
        for l in self.trail[lim:]:
            v = l >> 1
            lv[l] = 0
            lv[l ^ 1] = 0
            phase[v] = not (l & 1)
            self.reason[v] = None
            heapq.heappush(heap, (-act[v], v))
        del self.trail[lim:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick(self):
        heap, lv, act = self.heap, self.lv, self.activity
        while heap:
            a, v = heapq.heappop(heap)
            if lv[2 * v] == 0 and -a == act[v]:
                return v
        return None

    def _reduce_db(self):
        locked = {self.reason[l >> 1] for l in self.trail}
        cands = [(lbd, ci) for ci, lbd in self.learnt_meta.items()
                 if lbd > 2 and ci not in locked]
        cands.sort(key=lambda t: (-t[0], -t[1]))
        for _, ci in cands[: len(cands) // 2]:
            self.clauses[ci] = None
            del self.learnt_meta[ci]

    def solve(self, deadline: float = None):
        if not self.ok:
            return False
        if self._propagate() is not None:
            return False
        self._seen = [False] * (self.n + 1)
        restart_i = 0
        budget = 100 * _luby(restart_i)
        since_restart = 0
        max_learnts = max(2000, len(self.clauses) // 3)
        ticks = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    return False
                learnt, bt, lbd = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._assign(learnt[0], None)
                else:
                    ci = len(self.clauses)
                    self.clauses.append(learnt)
                    self.learnt_meta[ci] = lbd
                    self.watches[learnt[0]].append(ci)
                    self.watches[learnt[1]].append(ci)
                    self._assign(learnt[0], ci)
                self.inc /= 0.95
                continue
            ticks += 1
            if deadline is not None and ticks & 255 == 0 and time.monotonic() > deadline:
                raise _Timeout()
            if since_restart >= budget:
                restart_i += 1
                budget = 100 * _luby(restart_i)
                since_restart = 0
                self._cancel_until(0)
                continue
            if len(self.learnt_meta) > max_learnts:
                self._reduce_db()
                max_learnts = int(max_learnts * 1.1)
            v = self._pick()
            if v is None:
                return True
            self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._assign(2 * v + (0 if self.phase[v] else 1), None)

    def model(self) -> dict:
        return {v: self.lv[2 * v] == 1 for v in range(1, self.n + 1)}

    def stats(self) -> dict:
        return {"decisions": self.decisions, "conflicts": self.conflicts,
                "propagations": self.propagations}


def _solve_internal(formula, cfg: SolverConfig) -> SolveResult:
    deadline = None if cfg.time_budget is None else time.monotonic() + cfg.time_budget
    solver = CdclSolver(formula.num_vars, formula.clauses, seed=cfg.seed)
    try:
        sat = solver.solve(deadline)
    except _Timeout:
        return SolveResult("timeout", None, solver.stats())
    if not sat:
        return SolveResult("unsat", None, solver.stats())
    model = solver.model()
    if not check_model(formula, model):
        raise AssertionError("internal solver produced an assignment that violates a clause")
    return SolveResult("sat", model, solver.stats())


def _solve_external(formula, cfg: SolverConfig) -> SolveResult:
    path = cfg.solver_path or os.environ.get(SOLVER_ENV)
    if not path:
        raise ExternalSolverFailure(f"no solver path given and {SOLVER_ENV} is unset")
    with tempfile.TemporaryDirectory() as tmp:
        cnf = os.path.join(tmp, "formula.cnf")
        with open(cnf, "w", encoding="ascii") as fh:
            fh.write(write_dimacs(formula) + "\n")
        try:
            proc = subprocess.run([path, cnf], capture_output=True, text=True,
                                  timeout=cfg.time_budget)
        except subprocess.TimeoutExpired:
            return SolveResult("timeout", None, {})
        except OSError as e:
            raise ExternalSolverFailure(f"cannot run {path}: {e}") from None
    status = None
    for line in proc.stdout.splitlines():
        if line.startswith("s "):
            status = line[2:].strip()
    if status == "UNSATISFIABLE" and proc.returncode in (0, 20):
        return SolveResult("unsat", None, {})
    if status == "SATISFIABLE" and proc.returncode in (0, 10):
        try:
            raw = parse_model(proc.stdout)
        except ParseError as e:
            raise ExternalSolverFailure(f"unparsable model: {e}") from None
        model = {v: raw.get(v, False) for v in range(1, formula.num_vars + 1)}
        if not check_model(formula, model):
            raise ExternalSolverFailure("external solver returned a non-model")
        return SolveResult("sat", model, {})
    if status in ("UNKNOWN", "TIMEOUT"):
        return SolveResult("timeout", None, {})
    raise ExternalSolverFailure(
        f"unexpected solver result (exit {proc.returncode}, status {status!r})")


def solve(formula, cfg: SolverConfig = None) -> SolveResult:
    cfg = cfg or SolverConfig()
    if cfg.backend == "external":
        return _solve_external(formula, cfg)
    return _solve_internal(formula, cfg)
