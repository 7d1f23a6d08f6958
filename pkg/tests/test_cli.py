import subprocess
import sys

import numpy as np
import pytest

from limeqo import cli_io
from limeqo.cli import main, parse_budget


def limeqo(*args):
    return main([str(a) for a in args])


@pytest.fixture
def workload(tmp_path):
    path = tmp_path / "w.csv"
    assert limeqo("synth", "--n", 50, "--k", 12, "--rank", 3, "--seed", 1, "--out", path) == 0
    return path


def test_synth_then_spectrum(workload, tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert limeqo("spectrum", "--matrix", workload, "--out", out) == 0
    s = cli_io.read_spectrum(out)
    assert s[3] < 1e-8 * s[0]
    assert capsys.readouterr().out.splitlines()[-1] == f"wrote {out}"


def test_tiny_budget_trace(workload, tmp_path):
    trace = tmp_path / "t.csv"
    assert limeqo("simulate", "--truth", workload, "--policy", "random", "--budget", 0.001, "--trace", trace) == 0
    rows = cli_io.read_trace(trace)
    assert len(rows) == 1 and rows[0]["explore_seconds"] == 0.0


def test_simulate_state_then_complete(workload, tmp_path):
    trace, state, what = tmp_path / "t.csv", tmp_path / "s.csv", tmp_path / "what.csv"
    assert limeqo("simulate", "--truth", workload, "--budget", "0.5x", "--iters", 10,
                  "--trace", trace, "--state-out", state, "-v") == 0
    s = cli_io.read_state(state)
    assert s.default_hint == 0 and s.n_complete() > 50
    assert limeqo("complete", "--state", state, "--iters", 10, "--out", what) == 0
    w_hat = cli_io.read_grid(what)[0]
    assert np.array_equal(w_hat[s.complete], s.values[s.complete])
    assert np.all(w_hat[s.censored] >= s.values[s.censored])
    assert limeqo("spectrum", "--matrix", what) == 0


def test_compare_has_reference_rows(workload, tmp_path):
    out = tmp_path / "r.csv"
    assert limeqo("compare", "--truth", workload, "--budgets", "0.25x,0.5x", "--policies", "random,greedy",
                  "--seeds", 2, "--out", out) == 0
    rows = cli_io.read_report(out)
    assert [r["policy"] for r in rows[:2]] == ["Default", "Optimal"]
    assert len(rows) == 6


def test_cost_policy_needs_matrix(workload, tmp_path, capsys):
    assert limeqo("simulate", "--truth", workload, "--policy", "cost", "--budget", 10, "--trace", tmp_path / "t") == 2
    assert "cost" in capsys.readouterr().err
    costs = tmp_path / "c.csv"
    w2 = tmp_path / "w2.csv"
    assert limeqo("synth", "--n", 50, "--k", 12, "--seed", 1, "--out", w2, "--costs-out", costs) == 0
    assert limeqo("simulate", "--truth", w2, "--policy", "qo-advisor", "--budget", 10, "--cost-matrix", costs,
                  "--trace", tmp_path / "t") == 0


def test_shift_flags(workload, tmp_path):
    extra = tmp_path / "x.csv"
    assert limeqo("synth", "--n", 10, "--k", 12, "--seed", 2, "--out", extra) == 0
    trace = tmp_path / "t.csv"
    assert limeqo("simulate", "--truth", workload, "--policy", "greedy", "--budget", "1x", "--shift-at", 20,
                  "--shift-kind", "workload", "--shift-truth", extra, "--trace", trace) == 0
    assert limeqo("simulate", "--truth", workload, "--budget", 10, "--shift-at", 20, "--trace", trace) == 2


def test_input_errors_exit_2(tmp_path, capsys):
    assert limeqo("simulate", "--truth", tmp_path / "nope.csv", "--budget", 1, "--trace", tmp_path / "t") == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("query,h1,h2\nq1,1\n")
    assert limeqo("spectrum", "--matrix", bad) == 2
    err = capsys.readouterr()
    assert "line 2" in err.err and err.out == ""


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--bogus"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_parse_budget():
    assert parse_budget("12.5", 100.0) == 12.5
    assert parse_budget("0.5x", 100.0) == 50.0
    with pytest.raises(ValueError):
        parse_budget("0", 1.0)


def test_module_entrypoint_and_env_seed(tmp_path):
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    env = {"LIMEQO_SEED": "7", "PATH": ""}
    for out in (out_a, out_b):
        proc = subprocess.run([sys.executable, "-m", "limeqo", "synth", "--n", "5", "--k", "3", "--out", str(out)],
                              capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout == f"wrote {out}\n"
    assert out_a.read_bytes() == out_b.read_bytes()
    proc = subprocess.run([sys.executable, "-m", "limeqo", "synth", "--n", "5", "--k", "3", "--seed", "7",
                           "--out", str(tmp_path / "c.csv")], capture_output=True, text=True)
    assert (tmp_path / "c.csv").read_bytes() == out_a.read_bytes()
