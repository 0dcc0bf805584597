import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from bondlab.bondage import bondage_bounds, bondage_exact, certified_lower_bound, damage_table
from bondlab.cli import DAMAGE_HEADER, main
from bondlab.formulas import FormulaContext, log_f
from bondlab.graph import Graph, RandomSource, read_graph, sample_gnp, write_graph

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def k2(tmp_path):
    path = tmp_path / "k2.txt"
    path.write_text("n 2\n0 1\n")
    return str(path)


@pytest.fixture
def edgeless(tmp_path):
    path = tmp_path / "e.txt"
    path.write_text("n 4\n")
    return str(path)


@pytest.fixture
def random_graph(tmp_path):
    g = sample_gnp(9, 0.4, RandomSource(17))
    path = tmp_path / "g.json"
    write_graph(g, path)
    return g, str(path)


def test_gamma_k2(capsys, k2):
    code, out, err = run(capsys, "gamma", k2)
    assert code == 0
    assert out == '{"gamma":1,"X_gamma":2}\n'
    assert err.startswith("seed: ")


def test_gamma_with_k_table(capsys, random_graph):
    g, path = random_graph
    code, out, _ = run(capsys, "gamma", path, "--k", "3", "--k", "2")
    data = json.loads(out)
    assert code == 0 and set(data["X_k"]) == {"2", "3"}


def test_gamma_enumerate_hex(capsys, tmp_path):
    path = tmp_path / "c4.txt"
    path.write_text("n 4\n0 1\n1 2\n2 3\n0 3\n")
    code, out, _ = run(capsys, "gamma", str(path), "--enumerate")
    masks = [int(x, 16) for x in out.split()]
    assert code == 0 and len(masks) == 6 and all(m.bit_count() == 2 for m in masks)
    code, out, err = run(capsys, "gamma", str(path), "--enumerate", "--cap", "2")
    assert code == 2 and len(out.split()) == 2 and "truncated" in err


def test_bondage_edgeless(capsys, edgeless):
    code, out, _ = run(capsys, "bondage", "--mode", "exact", edgeless)
    assert code == 0 and json.loads(out) == {"b": "infinity"}


def test_bondage_modes_match_library(capsys, random_graph):
    g, path = random_graph
    for mode, fn in [("exact", bondage_exact), ("bounds", bondage_bounds), ("certify", certified_lower_bound)]:
        code, out, _ = run(capsys, "bondage", path, "--mode", mode)
        assert code == 0
        assert json.loads(out) == json.loads(json.dumps(fn(g).to_dict()))


def test_bondage_limit(capsys, tmp_path):
    path = tmp_path / "c4.txt"
    path.write_text("n 4\n0 1\n1 2\n2 3\n0 3\n")
    code, out, _ = run(capsys, "bondage", str(path), "--limit", "2")
    assert json.loads(out) == {"b": None, "b_greater_than": 2}


def test_damage_csv_matches_library(capsys, random_graph):
    g, path = random_graph
    code, out, _ = run(capsys, "damage", path, "--L", "1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == DAMAGE_HEADER
    table = damage_table(g, L=1)
    assert len(rows) - 1 == len(table.pairs)
    for row in rows[1:]:
        a, b = int(row[0]), int(row[1])
        u, v = (a, b) if row[2] == "uv" else (b, a)
        dmg = table.pairs[(u, v)]
        light, heavy = dmg.split(1)
        assert (int(row[3]), int(row[4])) == (dmg.total.numerator, dmg.total.denominator)
        assert (int(row[5]), int(row[6])) == (light.numerator, light.denominator)
        assert (int(row[7]), int(row[8])) == (heavy.numerator, heavy.denominator)


def test_damage_capacity_exit_code(capsys, random_graph):
    _, path = random_graph
    code, _, err = run(capsys, "damage", path, "--cap", "1")
    assert code == 2 and "capacity" in err


def test_formulas(capsys):
    code, out, _ = run(capsys, "formulas", "--n", "100", "--p", "0.5")
    data = json.loads(out)
    assert code == 0
    assert list(data) == ["n", "p", "epsilon", "p_hat", "r", "r_closed_form", "L", "log_f_at_r",
                          "log_one_over_pn", "expected_damage_log"]
    assert data["r"] == 3
    ctx = FormulaContext.build(100, 0.5)
    assert data["log_f_at_r"] == log_f(100, 3, 0.5)
    assert data["L"] == ctx.L and data["p_hat"] == ctx.p_hat
    assert data["log_one_over_pn"] == -math.log(50)


def test_formulas_domain_error(capsys):
    code, _, err = run(capsys, "formulas", "--n", "5", "--p", "0.1")
    assert code == 1 and "error" in err


def test_gen_model_flags_are_exclusive(capsys):
    code, _, err = run(capsys, "gen", "--n", "5", "--p", "0.5", "--m", "3")
    assert code == 1 and "not allowed" in err


def test_unknown_flag_rejected(capsys, k2):
    code, _, err = run(capsys, "gamma", k2, "--bogus")
    assert code == 1 and "unrecognized" in err


def test_gen_seed_resolution(capsys, monkeypatch):
    code, out, err = run(capsys, "gen", "--n", "12", "--p", "0.5", "--seed", "42")
    assert code == 0 and "seed: 42" in err
    want = sample_gnp(12, 0.5, RandomSource(42, 0)).to_dict()
    assert json.loads(out) == want
    monkeypatch.setenv("BONDLAB_SEED", "42")
    code, out2, err = run(capsys, "gen", "--n", "12", "--p", "0.5")
    assert out2 == out and "seed: 42" in err
    monkeypatch.delenv("BONDLAB_SEED")
    code, _, err = run(capsys, "gen", "--n", "12", "--p", "0.5")
    assert int(err.split("seed: ")[1].split()[0]) >= 0


def test_gen_formats_and_out(capsys, tmp_path):
    path = tmp_path / "g.txt"
    code, out, _ = run(capsys, "gen", "--n", "6", "--m", "4", "--seed", "1", "--format", "edges", "--out", str(path))
    assert code == 0 and out == ""
    assert read_graph(path).m == 4
    code, out, _ = run(capsys, "gen", "--n", "4", "--process", "--seed", "1")
    assert sorted(map(tuple, json.loads(out)["stream"])) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_missing_file_is_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "gamma", str(tmp_path / "nope.json"))
    assert code == 3 and "nope.json" in err


def test_exp_writes_identical_files(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        code, out, _ = run(capsys, "exp", "moments", "--n", "10", "--p", "0.5", "--k", "3",
                           "--samples", "5", "--seed", "9", "--out", str(path))
        assert code == 0 and out == ""
    assert paths[0].read_bytes() == paths[1].read_bytes()
    meta = json.loads(Path(str(paths[0]) + ".meta.json").read_text())
    assert meta["seed"] == 9


def test_exp_jsonl_stdout(capsys):
    code, out, err = run(capsys, "exp", "concentration", "--n", "20", "--p", "0.3", "--samples", "3",
                         "--seed", "2", "--format", "jsonl")
    assert code == 0 and len(out.splitlines()) == 3
    assert json.loads(err.splitlines()[-1])["kind"] == "concentration"


def test_exp_domain_error(capsys):
    code, _, _ = run(capsys, "exp", "concentration", "--n", "20", "--p", "0.95", "--seed", "1")
    assert code == 1


@pytest.mark.parametrize("cmd", ["main", "gen", "gamma", "bondage", "damage", "formulas", "exp"])
def test_help_text_golden(cmd, capsys, monkeypatch):
    monkeypatch.setenv("COLUMNS", "80")
    argv = ([] if cmd == "main" else [cmd]) + ["--help"]
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert out == (GOLDEN / f"help_{cmd}.txt").read_text()


def test_help_lists_every_flag(capsys, monkeypatch):
    from bondlab.cli import build_parser

    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, p in sub.choices.items():
        text = p.format_help()
        for action in p._actions:
            for flag in action.option_strings:
                assert flag in text, (name, flag)


def test_module_entry_point(k2):
    proc = subprocess.run([sys.executable, "-m", "bondlab", "gamma", k2], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == {"gamma": 1, "X_gamma": 2}
    assert "seed:" in proc.stderr
