import json
import math
import subprocess
import sys

import pytest

from ctxbell.cli import main
from ctxbell.table import read_csv


@pytest.fixture
def runs_csv(tmp_path):
    path = tmp_path / "runs.csv"
    assert main(["simulate", "--runs", "5000", "--seed", "7", "--out", str(path)]) == 0
    return path


def test_simulate_writes_csv(runs_csv):
    text = runs_csv.read_text()
    assert text.startswith("# ")
    assert "run,setting_left,outcome_left,setting_right,outcome_right" in text
    assert read_csv(runs_csv).n_runs == 5000


def test_simulate_same_seed_byte_identical(tmp_path):
    a, b, c = (tmp_path / f"{x}.csv" for x in "abc")
    main(["simulate", "--runs", "3000", "--seed", "1", "--out", str(a)])
    main(["simulate", "--runs", "3000", "--seed", "1", "--jobs", "3", "--out", str(b)])
    main(["simulate", "--runs", "3000", "--seed", "2", "--out", str(c)])
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_simulate_with_config(tmp_path):
    cfg = tmp_path / "model.cfg"
    cfg.write_text("angle_a = 0\nangle_b = 60\n")
    out = tmp_path / "runs.csv"
    assert main(["simulate", "--config", str(cfg), "--schedule", "fixed:AB",
                 "--runs", "100", "--out", str(out)]) == 0
    assert "# angle_b_deg=60\n" in out.read_text()


def test_analyze_json(runs_csv, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["analyze", "--in", str(runs_csv), "--json", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["n_runs"] == 5000
    assert "contextual max|f|" in capsys.readouterr().out


def test_analyze_stdout(runs_csv, capsys):
    assert main(["analyze", "--in", str(runs_csv)]) == 0
    assert json.loads(capsys.readouterr().out)["chsh"]["semantics"] == "contextual"


def test_chsh_analytic(capsys):
    assert main(["chsh", "--analytic"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["max"] == pytest.approx(2 * math.sqrt(2))
    assert len(out["variants"]) == 8


def test_chsh_from_data(runs_csv, capsys):
    assert main(["chsh", "--in", str(runs_csv)]) == 0
    assert json.loads(capsys.readouterr().out)["max"] > 2


def test_scan(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["scan", "--step-deg", "45", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "theta_deg,p_pp,p_pm,corr,chsh_variant_max"
    assert len(lines) == 10
    assert lines[1].startswith("0,0,0.5,-1,")


def test_polytope_from_report(runs_csv, tmp_path):
    report = tmp_path / "report.json"
    main(["analyze", "--in", str(runs_csv), "--json", str(report)])
    out = tmp_path / "poly.json"
    assert main(["polytope", "--in", str(report), "--out", str(out)]) == 0
    result = json.loads(out.read_text())
    assert result["feasible"] is False
    assert result["certificate"]["value"] > 2


def test_polytope_from_csv(runs_csv, capsys):
    assert main(["polytope", "--in", str(runs_csv)]) == 0
    assert "feasible" in json.loads(capsys.readouterr().out)


@pytest.mark.parametrize("argv", [
    ["simulate", "--runs", "0"],
    ["simulate", "--schedule", "fixed:BA"],
    ["scan", "--step-deg", "-1"],
    ["analyze", "--in", "/nonexistent/runs.csv"],
])
def test_validation_exit_code(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_bad_csv_exit_code(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("run,setting_left,outcome_left,setting_right,outcome_right\n1,B,+1,A,+1\n")
    assert main(["analyze", "--in", str(bad)]) == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert main(["polytope", "--in", str(junk)]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ctxbell", "scan", "--step-deg", "90"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert len(proc.stdout.splitlines()) == 6
