import json
import os

import pytest

from conftest import fixture_path
from logot.cli import main

REPLAY = fixture_path("replay")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def prog(tmp_path):
    def write(text, name="p.lp"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def test_solve_exit_codes(capsys, prog):
    code, out, _ = run(capsys, "solve", prog("a :- not b. b :- not a."), "--models", "0")
    assert code == 10 and out.count("Answer:") == 2 and "SATISFIABLE" in out
    code, out, _ = run(capsys, "solve", prog("a. :- a."))
    assert code == 20 and "UNSATISFIABLE" in out
    code, out, _ = run(capsys, "solve", prog("{ a; b }. :- not a, not b. #minimize { 1: a; 2: b }."))
    assert code == 30 and "Optimization: 1" in out and "OPTIMUM FOUND" in out


def test_solve_const_override(capsys, prog):
    code, out, _ = run(capsys, "solve", prog("#const k=1. n(1..k)."), "--const", "k=3")
    assert code == 10 and "n(3)" in out
    code, _, err = run(capsys, "solve", prog("a."), "--const", "k")
    assert code == 2 and "name=value" in err


def test_ground_prints_program(capsys, prog):
    code, out, err = run(capsys, "ground", prog("p(1..2). q(X) :- p(X)."))
    assert code == 0 and "q(2)." in out and "atoms: 4" in err


def test_bad_programs(capsys, prog):
    code, _, err = run(capsys, "solve", prog("a :- "))
    assert code == 2 and "ASPSyntaxError" in err
    code, _, err = run(capsys, "ground", prog("p(X) :- q."))
    assert code == 1 and "unsafe variable X" in err
    code, _, err = run(capsys, "solve", str(os.path.join(str(prog("")), "missing.lp")))
    assert code == 2


def test_gen_and_translate(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "--task", "hitori", "--n", "2", "--seed", "3",
                       "--params", '{"size": 4}', "--out", str(tmp_path))
    assert code == 0
    files = sorted(os.listdir(tmp_path / "hitori"))
    assert files == ["0000.txt", "0001.txt"]
    code, out, _ = run(capsys, "translate", str(tmp_path / "hitori" / "0000.txt"), "--task", "hitori",
                       "--out", str(tmp_path / "tr"))
    assert code == 0 and "black(" in out and "pos(1, 1," in out
    trace = json.loads((tmp_path / "tr" / "trace.json").read_text())
    assert trace["stages"][-1]["name"] == "union"


def test_translate_golden_task(capsys, tmp_path):
    path = tmp_path / "q.lp"
    code, out, _ = run(capsys, "translate", fixture_path("golden", "legality.txt"), "--task", "legality")
    assert code == 0 and "occurs(move(green, blue, table), 0)." in out
    path.write_text(out)
    code, out, _ = run(capsys, "solve", str(path))
    assert code == 20  # the first move is illegal


def test_gen_rejects_unknown_task(capsys):
    code, _, err = run(capsys, "gen", "--task", "chess")
    assert code == 2 and "unknown task" in err
    code, _, err = run(capsys, "gen", "--task", "sudoku", "--params", "{oops")
    assert code == 2


def test_run_and_report(capsys, tmp_path):
    out_dir = tmp_path / "run"
    code, out, _ = run(capsys, "run", "--task", "legality,projection", "--n", "2", "--out", str(out_dir))
    assert code == 0
    assert out.splitlines()[0] == "task,n,correct,accuracy,cost,mean_ms"
    assert out.splitlines()[1:] == ["legality,2,2,1.000000,0.0,", "projection,2,2,1.000000,0.0,"]
    code, csv_out, _ = run(capsys, "report", str(out_dir))
    assert code == 0 and csv_out == out
    code, md, _ = run(capsys, "report", str(out_dir / "results.json"), "--format", "markdown",
                      "--out", str(tmp_path / "r.md"))
    assert code == 0 and "| Logot (reference) |" in md and (tmp_path / "r.md").read_text() == md


def test_run_replay_config(capsys, tmp_path):
    code, out, _ = run(capsys, "run", "--config", os.path.join(REPLAY, "config.json"), "--out", str(tmp_path / "r"))
    assert code == 0
    with open(os.path.join(REPLAY, "expected", "report.csv")) as f:
        assert out == f.read()


def test_run_config_errors(capsys, tmp_path, monkeypatch):
    code, _, err = run(capsys, "run", "--config", str(tmp_path / "nope.json"))
    assert code == 2
    monkeypatch.delenv("LOGOT_API_KEY", raising=False)
    code, _, err = run(capsys, "run", "--task", "sudoku", "--n", "1", "--mode", "llm")
    assert code == 2 and "LOGOT_API_KEY" in err
    code, _, err = run(capsys, "run", "--task", "sudoku", "--n", "1", "--mode", "replay")
    assert code == 2
    code, _, err = run(capsys, "report", str(tmp_path))
    assert code == 2


def test_run_reports_completed_even_when_wrong(capsys, tmp_path):
    # a replay run with wrong answers still completes with exit code 0
    code, out, _ = run(capsys, "run", "--config", os.path.join(REPLAY, "config.json"), "--task", "legality")
    assert code == 0 and "legality,2,1,0.500000" in out
