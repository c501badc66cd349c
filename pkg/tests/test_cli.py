import json
import subprocess
import sys

import pytest

from hicontrast import cli
from hicontrast.checks import CheckResult
from hicontrast.errors import SolverDiverged

SCENARIO = """
name = tiny
mode = high
geometry.domain = disk 0 0 1
inclusion.1.shape = disk 0 0 0.5
boundary.g = 0 1 0
mesh.h = 0.15
sweep.eta = 1e2 1e3
expansion.order = 3
"""


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "tiny.txt"
    path.write_text(SCENARIO)
    return path


def test_run_writes_reports(scenario, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", str(scenario), "--out", str(out), "--no-timing"]) == 0
    lines = (out / "results.csv").read_text().splitlines()
    assert lines[0] == "eta,I,h1_error,l2_error,ratio,u_norm,runtime_ms"
    assert len(lines) == 1 + 2 * 4
    summary = json.loads((out / "summary.json").read_text())
    assert summary["scenario"] == "tiny" and summary["failures"] == []


def test_mesh_expand_check(scenario, tmp_path):
    out = tmp_path / "o"
    assert cli.main(["mesh", str(scenario), "--out", str(out)]) == 0
    assert (out / "mesh.txt").stat().st_size > 0
    assert cli.main(["expand", str(scenario), "--out", str(out)]) == 0
    assert (out / "expansion").exists() and (out / "a_geom.csv").exists()
    assert cli.main(["check", str(scenario), "--out", str(out)]) == 0


def test_config_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text(SCENARIO + "mesh.h = -1\n")
    assert cli.main(["run", str(bad), "--out", str(tmp_path)]) == 1
    assert "mesh.h" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "missing.txt")]) == 1


def test_solver_failure_exits_2(scenario, tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        raise SolverDiverged("forced")

    monkeypatch.setattr("hicontrast.experiments.solve_direct", broken)
    assert cli.main(["run", str(scenario), "--out", str(tmp_path / "o")]) == 2
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert len(summary["failures"]) == 2


def test_invariant_failure_exits_3(scenario, tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "run_checks", lambda *a, **k: [CheckResult("forced", 1.0, 0.0)])
    assert cli.main(["check", str(scenario), "--out", str(tmp_path)]) == 3


def test_module_entry_point(scenario, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hicontrast", "mesh", str(scenario), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
