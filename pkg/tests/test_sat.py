import itertools
import random
import stat
import sys
import textwrap

import pytest
from helpers import random_cnf, truth_table
from hypothesis import given, settings
from strategies import cnfs

from stripsmorph.encode import CnfFormula, decode_model, encode_cnf
from stripsmorph.model import Kind
from stripsmorph.propagate import ac3
from stripsmorph.sat import (
    CdclSolver,
    ExternalSolverFailure,
    SolverConfig,
    _luby,
    check_model,
    solve,
)


def F(n, clauses):
    return CnfFormula(n, [tuple(c) for c in clauses])


def test_unit_formula():
    res = solve(F(1, [[1]]))
    assert res.status == "sat" and res.model == {1: True}


def test_contradictory_units():
    assert solve(F(1, [[1], [-1]])).status == "unsat"


def test_empty_clause_and_empty_formula():
    assert solve(F(0, [()])).status == "unsat"
    res = solve(F(0, []))
    assert res.sat and res.model == {}


def test_fixture_formula_decodes_to_fixture(inst):
    P, P2 = inst["P_ab"], inst["P_xyz"]
    phi = encode_cnf(P, P2, ac3(P, P2, Kind.SSI))
    m = decode_model(phi.catalog, solve(phi).model)
    assert (m.fluent_map, m.op_map) == ((0, 1), (0,))


def test_check_model_examples():
    assert check_model(F(2, [[1, 2]]), {1: False, 2: True})
    assert not check_model(F(1, [[1]]), {1: False})
    assert check_model(F(0, []), {})


def test_luby_sequence():
    assert [_luby(i) for i in range(15)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(time_budget=0)
    with pytest.raises(ValueError):
        SolverConfig(backend="quantum")


def pigeonhole(holes):
    pigeons = holes + 1
    var = lambda p, h: p * holes + h + 1  # noqa: E731
    cl = [[var(p, h) for h in range(holes)] for p in range(pigeons)]
    for h in range(holes):
        for p, q in itertools.combinations(range(pigeons), 2):
            cl.append([-var(p, h), -var(q, h)])
    return F(pigeons * holes, cl)


def test_pigeonhole_is_unsat():
    assert solve(pigeonhole(5)).status == "unsat"


def test_timeout_is_cooperative():
    res = solve(pigeonhole(11), SolverConfig(time_budget=0.05))
    assert res.status == "timeout"
    assert "conflicts" in res.stats


@settings(max_examples=300, deadline=None)
@given(cnfs(max_vars=12, max_clauses=50))
def test_agrees_with_truth_table(f):
    n, clauses = f
    phi = F(n, clauses)
    res = solve(phi)
    expected = len(truth_table(n, clauses)) > 0
    assert res.sat == expected
    if res.sat:
        assert check_model(phi, res.model)
        assert set(res.model) == set(range(1, n + 1))


def test_agrees_with_truth_table_on_seeded_formulas():
    rng = random.Random(3)
    for _ in range(300):
        n, clauses = random_cnf(rng)
        res = solve(F(n, clauses))
        assert res.sat == (len(truth_table(n, clauses)) > 0)


@given(cnfs(max_vars=12, max_clauses=50))
def test_same_seed_same_model(f):
    n, clauses = f
    a = solve(F(n, clauses), SolverConfig(seed=4))
    b = solve(F(n, clauses), SolverConfig(seed=4))
    assert a.status == b.status and a.model == b.model


def test_solver_object_reports_stats():
    s = CdclSolver(3, [(1, 2), (-1, 3), (-2, -3)], seed=0)
    assert s.solve() is True
    assert set(s.stats()) == {"decisions", "conflicts", "propagations"}


# -- external backend ------------------------------------------------------------

def _script(tmp_path, body):
    p = tmp_path / "solver.py"
    p.write_text(f"#!{sys.executable}\n" + textwrap.dedent(body))
    p.chmod(p.stat().st_mode | stat.S_IEXEC)
    return str(p)


GOOD_SOLVER = """
    import sys
    from stripsmorph.encode import CnfFormula
    from stripsmorph.sat import solve
    from stripsmorph.textio import parse_dimacs
    n, clauses = parse_dimacs(open(sys.argv[1]).read())
    res = solve(CnfFormula(n, clauses))
    if res.sat:
        print("s SATISFIABLE")
        print("v " + " ".join(str(v if b else -v) for v, b in sorted(res.model.items())) + " 0")
        sys.exit(10)
    print("s UNSATISFIABLE")
    sys.exit(20)
"""


def test_external_solver_round_trip(tmp_path):
    path = _script(tmp_path, GOOD_SOLVER)
    cfg = SolverConfig(backend="external", solver_path=path)
    res = solve(F(2, [[1], [-1, 2]]), cfg)
    assert res.sat and res.model == {1: True, 2: True}
    assert solve(F(1, [[1], [-1]]), cfg).status == "unsat"


def test_external_solver_failures(tmp_path):
    bad = _script(tmp_path, "print('hello')\n")
    with pytest.raises(ExternalSolverFailure):
        solve(F(1, [[1]]), SolverConfig(backend="external", solver_path=bad))
    with pytest.raises(ExternalSolverFailure):
        solve(F(1, [[1]]), SolverConfig(backend="external",
                                        solver_path=str(tmp_path / "missing")))


def test_external_solver_lying_model_is_rejected(tmp_path):
    liar = _script(tmp_path, "print('s SATISFIABLE'); print('v -1 0')\n")
    with pytest.raises(ExternalSolverFailure):
        solve(F(1, [[1]]), SolverConfig(backend="external", solver_path=liar))


def test_external_solver_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("STRIPS_MORPH_SOLVER", _script(tmp_path, GOOD_SOLVER))
    assert solve(F(1, [[1]]), SolverConfig(backend="external")).sat
    monkeypatch.delenv("STRIPS_MORPH_SOLVER")
    with pytest.raises(ExternalSolverFailure):
        solve(F(1, [[1]]), SolverConfig(backend="external"))

