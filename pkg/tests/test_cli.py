import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from ponsleep import cli

ROOT = Path(__file__).resolve().parents[1]
EXAMPLE = ROOT / "scenarios" / "three_onus.json"

SMALL = """
replications = {reps}
schedulers = ["osmp", "fdos"]
wall_cap_s = {cap}

[sim]
n_onus = 16
runtime_ns = {runtime}
seed = 7

[sweep]
load = {loads}
"""


def scenario(tmp_path, loads="[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]", reps=1, cap=600,
             runtime=100_000_000):
    path = tmp_path / "sc.toml"
    path.write_text(SMALL.format(loads=loads, reps=reps, cap=cap, runtime=runtime))
    return str(path)


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


def test_gen_same_seed_same_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli("gen", 8, 6, "--seed", 3, "--feasible", "--out", a) == 0
    assert run_cli("gen", 8, 6, "--seed", 3, "--feasible", "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_budget_exit(capsys):
    assert run_cli("gen", 6, 1, "--seed", 0, "--feasible", "--forced-prob", 0, "--max-tries", 0) == 6
    assert "error" in capsys.readouterr().err


def test_solve_example_with_oracle(tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("solve", EXAMPLE, "--oracle", "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["rho_f"] == "0" and rep["f"] == rep["oracle"]["f"] == 498
    assert rep["assignment"] == [0, 0, 2] and rep["jain"] == "9/5"


def test_malformed_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"num_onus": 1, "num_slots": 2, "windows": [{"lb": "x", "ub": 1}]}')
    assert run_cli("solve", bad) == 3
    assert "windows[0].lb" in capsys.readouterr().err


def test_empty_window_exit(tmp_path, capsys):
    bad = tmp_path / "empty.json"
    bad.write_text('{"num_onus": 2, "num_slots": 2, "windows": [{"lb": 0, "ub": 1}, {"lb": 1, "ub": 0}]}')
    assert run_cli("solve", bad) == 5
    assert "1" in capsys.readouterr().err


def test_validation_and_budget_exits(tmp_path):
    small_w = tmp_path / "w.json"
    small_w.write_text('{"num_onus": 2, "num_slots": 2, "windows": [{"forced": 0}, {"forced": 1}], "W": 1}')
    assert run_cli("solve", small_w) == 4
    big = tmp_path / "big.json"
    assert run_cli("gen", 8, 6, "--seed", 1, "--forced-prob", 0, "--out", big) == 0
    assert run_cli("oracle", big, "--budget", 1, "--no-prune") == 6


def test_usage_exit():
    with pytest.raises(SystemExit) as err:
        cli.main(["solve"])
    assert err.value.code == 2


def test_sweep_rows_and_summary(tmp_path):
    out = tmp_path / "rows.csv"
    assert run_cli("sweep", scenario(tmp_path, reps=2), "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2 * 9 * 2
    assert list(rows[0])[:12] == list(cli.CSV_COLUMNS)
    assert {r["status"] for r in rows} == {"ok"}
    summary = list(csv.DictReader((tmp_path / "rows.summary.csv").open()))
    assert len(summary) == 18 and {r["n"] for r in summary} == {"2"}


def test_sweep_bytes_identical(tmp_path):
    sc = scenario(tmp_path, loads="[0.2, 0.8]")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli("sweep", sc, "--out", a) == 0
    assert run_cli("sweep", sc, "--out", b, "--workers", 2) == 0
    assert a.read_bytes() == b.read_bytes()


def test_runtime_cap_flags_row(tmp_path):
    out = tmp_path / "rows.csv"
    assert run_cli("sweep", scenario(tmp_path, loads="[0.5]", cap=1e-6, runtime=2_000_000_000), "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["status"] for r in rows] == ["runtime_cap"] * 2 and rows[0]["energy_J"] == ""


@pytest.mark.parametrize("text, code", [
    ("[sweep]\nload = []\n", 4),
    ("[sim]\nbogus = 1\n", 4),
    ("schedulers = ['x']\n", 4),
    ("[sweep]\nload = [2.0]\n", 4),
    ("[sim\n", 3),
])
def test_scenario_errors(tmp_path, text, code):
    path = tmp_path / "s.toml"
    path.write_text(text)
    assert run_cli("sweep", path) == code


def test_simulate_single_row(tmp_path):
    out = tmp_path / "one.csv"
    assert run_cli("simulate", scenario(tmp_path), "--scheduler", "fdos", "--predictor", "ewma",
                   "--seed", 2, "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1 and rows[0]["scheduler"] == "fdos" and rows[0]["seed"] == "2"


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "ponsleep", "solve", str(EXAMPLE)],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["f"] == 498
