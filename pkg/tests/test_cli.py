import csv
import hashlib
import io
import json
import os
import shutil
import subprocess

import pytest

from stripsmorph.bench import COLUMNS, TIMING_COLUMNS
from stripsmorph.cli import main
from stripsmorph.model import Kind, verify_morphism
from stripsmorph.search import find_morphism
from stripsmorph.textio import (
    parse_dimacs,
    parse_instance,
    parse_morphism,
    read_instance,
    write_instance,
    write_morphism,
)

P_AB = "instance P_ab\nfluents a b\ninit a\ngoal b\nop o1\n  pre a\n  add b\n  del a\nend\n"
P_XYZ = ("instance P_xyz\nfluents x y z\ninit x\ngoal y\n"
         "op p1\n  pre x\n  add y\n  del x\nop p2\n  pre y\n  add z\nend\n")


@pytest.fixture
def files(tmp_path):
    (tmp_path / "p_ab.strips").write_text(P_AB)
    (tmp_path / "p_xyz.strips").write_text(P_XYZ)
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def test_check_found_writes_fixture_mapping(files):
    out = files / "m.json"
    stats = files / "s.json"
    code = run("check", "--kind", "ssi", files / "p_ab.strips", files / "p_xyz.strips",
               "--out", out, "--stats", stats, "--quiet")
    assert code == 10
    assert json.loads(out.read_text()) == {"kind": "ssi", "fluent_map": {"a": "x", "b": "y"},
                                           "op_map": {"o1": "p1"}}
    s = json.loads(stats.read_text())
    assert s["kind"] == "ssi" and "simplified_fraction" in s


def test_check_none_and_stats_still_written(files):
    stats = files / "s.json"
    code = run("check", "--kind", "ssi", files / "p_xyz.strips", files / "p_ab.strips",
               "--stats", stats)
    assert code == 20
    assert json.loads(stats.read_text())["early_unsat"] is True


def test_check_independent_set_k3(files):
    d = files / "k3"
    assert run("gen", "indepset", "--n", "3", "--edges", "v1-v2", "--k", "3",
               "--out-dir", d) == 0
    assert run("check", "--kind", "se", d / "a.strips", d / "b.strips") == 20
    assert run("oracle", "--kind", "se", d / "a.strips", d / "b.strips") == 20


def test_oracle_k2(files):
    d = files / "k2"
    run("gen", "indepset", "--n", "3", "--edges", "1-2", "--k", "2", "--out-dir", d)
    assert run("oracle", "--kind", "se", d / "a.strips", d / "b.strips") == 10
    A, B = read_instance(d / "a.strips"), read_instance(d / "b.strips")
    assert A.n_operators == 1 and B.fluents == ("1", "2")


def test_malformed_input_exits_1(files, capsys):
    bad = files / "bad.strips"
    bad.write_text("instance x\nfluents a\nwhat\nend\n")
    assert run("check", "--kind", "ssi", bad, files / "p_ab.strips") == 1
    assert "line 3" in capsys.readouterr().err
    assert run("check", "--kind", "ssi", files / "missing", files / "p_ab.strips") == 1


def test_timeout_exit_code(files, monkeypatch):
    import stripsmorph.search as search
    from stripsmorph.sat import SolveResult
    monkeypatch.setattr(search, "solve", lambda f, cfg: SolveResult("timeout", None, {}))
    assert run("check", "--kind", "ssih", files / "p_ab.strips", files / "p_xyz.strips",
               "--quiet") == 30


def test_verify(files, capsys):
    m = files / "m.json"
    m.write_text(json.dumps({"kind": "ssi", "fluent_map": {"a": "x", "b": "y"},
                             "op_map": {"o1": "p1"}}))
    assert run("verify", "--kind", "ssi", files / "p_ab.strips", files / "p_xyz.strips", m) == 0
    m.write_text(json.dumps({"kind": "ssi", "fluent_map": {"a": "y", "b": "x"},
                             "op_map": {"o1": "p1"}}))
    rep = files / "rep.json"
    assert run("verify", files / "p_ab.strips", files / "p_xyz.strips", m,
               "--report", rep) == 20
    assert "morphism[o1]" in capsys.readouterr().out
    assert json.loads(rep.read_text())["valid"] is False
    assert run("verify", "--kind", "se", files / "p_ab.strips", files / "p_xyz.strips", m) == 1


def test_encode_no_cp_matches_baseline(files, capsys):
    cnf = files / "f.cnf"
    stats = files / "enc.json"
    assert run("encode", "--kind", "ssih", files / "p_ab.strips", files / "p_xyz.strips",
               "--no-cp", "--dimacs", cnf, "--stats", stats) == 0
    text = cnf.read_text()
    header = text.splitlines()[0].split()
    assert header[:2] == ["p", "cnf"]
    n, clauses = parse_dimacs(text)
    s = json.loads(stats.read_text())
    assert (int(header[2]), int(header[3])) == (n, len(clauses)) == (s["variables"], s["clauses"])
    assert s["clauses_without_cp"] == len(clauses) and s["simplified_fraction"] == 0.0


def test_encode_is_byte_identical_across_runs(files):
    outs = []
    for i in range(2):
        cnf = files / f"f{i}.cnf"
        run("encode", "--kind", "se", files / "p_xyz.strips", files / "p_ab.strips",
            "--dimacs", cnf)
        outs.append(cnf.read_bytes())
    assert outs[0] == outs[1]


def test_statespace(files):
    (files / "pb.strips").write_text(
        "instance P_b\nfluents bp\ngoal bp\nop q1\n  add bp\nend\n")
    m = files / "e.json"
    m.write_text(json.dumps({"kind": "se", "fluent_map": {"bp": "b"}, "op_map": {"o1": "q1"}}))
    rep, dot = files / "rep.json", files / "lts.dot"
    assert run("statespace", files / "p_ab.strips", files / "pb.strips", m,
               "--report", rep, "--dot", dot) == 0
    assert json.loads(rep.read_text())["ok"] is True
    assert dot.read_text().startswith("digraph")


def test_gen_graph(files, capsys):
    assert run("gen", "graph", "--undirected", "--n", "2", "--edges", "1-2") == 0
    P = parse_instance(capsys.readouterr().out)
    assert P.n_fluents == 2 and P.n_operators == 2


def test_gen_rejects_bad_sizes(files):
    assert run("gen", "indepset", "--n", "3", "--edges", "1-2", "--k", "5",
               "--out-dir", files / "x") == 1
    assert run("gen", "graph", "--n", "2", "--edges", "1-7") == 1
    assert run("gen", "positive-pair", "--fluents", "0", "--out-dir", files / "y") == 1


@pytest.mark.parametrize("kind", ["si", "ssih", "ssi", "se"])
def test_gen_positive_pair_witness_verifies(files, kind):
    d = files / f"pp_{kind}"
    assert run("gen", "positive-pair", "--kind", kind, "--fluents", "6", "--ops", "6",
               "--seed", "1", "--out-dir", d) == 0
    A, B = read_instance(d / "a.strips"), read_instance(d / "b.strips")
    w = parse_morphism((d / "witness.json").read_text(), A, B)
    assert w.kind is Kind.parse(kind) and verify_morphism(A, B, w).ok
    assert run("verify", d / "a.strips", d / "b.strips", d / "witness.json") == 0
    assert run("check", "--kind", kind, d / "a.strips", d / "b.strips", "--quiet") == 10


def test_gen_is_deterministic(files):
    for i in range(2):
        run("gen", "positive-pair", "--kind", "ssi", "--seed", "5", "--out-dir", files / f"d{i}")
    for name in ("a.strips", "b.strips", "witness.json"):
        assert (files / "d0" / name).read_bytes() == (files / "d1" / name).read_bytes()


def _bench(corpus, csv_path, jobs, kinds="ssi,se"):
    return run("bench", "--corpus", corpus, "--kinds", kinds, "--timeout", "20",
               "--jobs", jobs, "--csv", csv_path, "--summary", str(csv_path) + ".json")


def _rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_bench_corpus(files):
    corpus = files / "corpus"
    assert run("gen", "positive-pair", "--kind", "ssi", "--fluents", "8", "--ops", "8",
               "--count", "6", "--seed", "2", "--out-dir", corpus) == 0
    out = files / "b1.csv"
    assert _bench(corpus, out, 1) == 0
    rows = _rows(out)
    assert len(rows) == 6 * 2
    assert list(rows[0]) == COLUMNS
    for r in rows:
        assert r["result"] in ("found", "none") and r["result"] == r["result_no_cp"]
        assert 0.0 <= float(r["simplified_fraction"]) <= 1.0
        if r["kind"] == "ssi":
            assert r["result"] == "found"
        if r["result"] == "found":
            d = corpus / r["pair"]
            A, B = read_instance(d / "a.strips"), read_instance(d / "b.strips")
            res = find_morphism(A, B, r["kind"])
            text = write_morphism(A, B, res.morphism)
            assert hashlib.sha1(text.encode()).hexdigest() == r["mapping_sha1"]
            assert verify_morphism(A, B, parse_morphism(text, A, B)).ok
    summary = json.loads((files / "b1.csv.json").read_text())
    assert {s["kind"] for s in summary} == {"ssi", "se"}
    out4 = files / "b4.csv"
    assert _bench(corpus, out4, 4) == 0

    def strip(rows):
        return sorted(tuple((k, v) for k, v in r.items() if k not in TIMING_COLUMNS)
                      for r in rows)
    assert strip(_rows(out4)) == strip(rows)


def test_bench_empty_corpus(files, capsys):
    empty = files / "empty"
    empty.mkdir()
    out = files / "e.csv"
    assert _bench(empty, out, 1) == 0
    assert out.read_text().strip() == ",".join(COLUMNS)
    assert "(empty)" in capsys.readouterr().out
    assert run("bench", "--corpus", files / "nope", "--csv", files / "n.csv") == 1


def test_console_script_is_installed(files):
    exe = shutil.which("strips-morph")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run([exe, "check", "--kind", "ssi", str(files / "p_ab.strips"),
                           str(files / "p_xyz.strips"), "--quiet"], capture_output=True,
                          text=True, env={**os.environ, "STRIPS_MORPH_SOLVER": ""})
    assert proc.returncode == 10
    assert '"a": "x"' in proc.stdout


def test_written_instances_parse_back(files):
    P = read_instance(files / "p_xyz.strips")
    text = write_instance(P)
    assert "  del\n" in text  # canonical form always lists all three parts
    assert write_instance(parse_instance(text)) == text
