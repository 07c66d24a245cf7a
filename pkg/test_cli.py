import json

import pytest
from click.testing import CliRunner

from app import cli

SMALL_RUN = """\
domain.shape = rectangle
domain.width = 1.0
domain.height = 1.0
grid.nx = 17
grid.ny = 17
bc.kind = constant
solver.eps = 0.1
solver.L = 1.0
solver.max_steps = 20
init.kind = random
init.seed = 3
"""


@pytest.fixture
def runner():
    return CliRunner()


def run_json(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


# -----------------------------
# WALL COST AND 1-D
# -----------------------------
def test_wallcost_prints_table(runner, tmp_path):
    result = runner.invoke(cli, ["wallcost", "--samples", "33", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0] == "z,K,Kp,H"
    assert len(lines) == 34
    assert float(lines[1].split(",")[1]) == pytest.approx(0.5, abs=1e-8)
    assert (tmp_path / "wallcost.csv").read_text() == result.output
    assert json.loads((tmp_path / "summary.json").read_text())["c0"] == pytest.approx(0.25, abs=1e-10)


def test_wallcost_tabulated_needs_table(runner, tmp_path):
    result = runner.invoke(cli, ["wallcost", "--potential", "tabulated", "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert "--table" in result.output


def test_oned_selects_structure(runner, tmp_path):
    doc = run_json(runner, ["oned", "--a", "0.6", "--H", "0.5", "--L", "0.4", "--eps", "0.02",
                            "--out", str(tmp_path)])
    assert doc["structure"] == "single_wall"
    assert 0.6 <= doc["m"] <= 1.0
    assert doc["eps_energy"]["total"] > 0
    assert doc["threshold_L_over_H"] is None
    assert (tmp_path / "profile.csv").read_text().startswith("y,u1,u2\n")


# -----------------------------
# SHARP CONFIGURATIONS
# -----------------------------
def test_astroid_then_residuals(runner, tmp_path):
    doc = run_json(runner, ["astroid", "--k", "1", "--samples", "2048", "--out", str(tmp_path)])
    assert doc["k"] == 1
    assert doc["length"] == pytest.approx(6.0, rel=1e-3)
    assert doc["e0_total"] == pytest.approx(1.5, rel=1e-3)
    residuals = run_json(runner, ["residuals", "--input", str(tmp_path / "sharp.json")])
    assert "interface" in residuals


def test_residuals_reports_unreadable_input(runner, tmp_path):
    result = runner.invoke(cli, ["residuals", "--input", str(tmp_path / "missing.json")])
    assert result.exit_code == 2
    assert "ParseError" in result.output


def test_div_bound_command(runner, tmp_path):
    doc = run_json(runner, ["check-div-bound", "--degree", "-1", "--n", "129", "--count", "3",
                            "--out", str(tmp_path)])
    assert doc["degree"] == -1
    assert doc["analytic"]["satisfied"] is True
    assert len(doc["family"]) == 3


def test_tactoid_command(runner, tmp_path):
    doc = run_json(runner, ["tactoid", "--lambda", "1.0", "--samples", "1025", "--out", str(tmp_path)])
    assert doc["lambda"] == 1.0
    assert doc["area"] > 0
    assert doc["energy_sharp"] == pytest.approx(doc["energy_reduced"], rel=0.01)
    assert abs(doc["reduced_junction_residual"]) <= 1e-8
    assert "junction_residual" not in doc
    assert doc["junction_force_norm"] >= 0
    assert (tmp_path / "wall.csv").read_text().startswith("sigma,x,y,t,psi\n")


# -----------------------------
# RELAXATION
# -----------------------------
def test_relax_then_energy(runner, tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text(SMALL_RUN)
    out = tmp_path / "run"
    doc = run_json(runner, ["relax", "--config", str(config), "--out", str(out)])
    summary = doc["summary"]
    assert summary["steps"] == 20
    assert summary["config"]["solver"]["dt_auto"]
    names = {f["name"] for f in doc["files"]}
    assert names == {"field.csv", "energy.csv", "contour.csv", "summary.json"}
    assert (out / "contour.csv").read_text() == "curve,s,x,y\n"
    energy = run_json(runner, ["energy", "--config", str(config), "--field", str(out / "field.csv")])
    assert energy["total"] == pytest.approx(summary["energy"]["total"], rel=1e-9)


def test_relax_rejects_bad_config(runner, tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text(SMALL_RUN + "bc.a = 1.2\n")
    result = runner.invoke(cli, ["relax", "--config", str(config), "--out", str(tmp_path / "run")])
    assert result.exit_code == 2
    assert "a in [0,1)" in result.output
    assert not (tmp_path / "run").exists()


def test_relax_needs_one_source(runner, tmp_path):
    result = runner.invoke(cli, ["relax", "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert "exactly one" in result.output


def test_unknown_scenario_is_a_usage_error(runner):
    result = runner.invoke(cli, ["relax", "--scenario", "spiral"])
    assert result.exit_code == 2
