import json

import numpy as np
import pytest

from models.field_model import ShapeKind
from utils.common import parallel_map, worker_count
from utils.config import KEYS, build_sim_config, log_level, output_dir, parse_config, sim_config_echo
from utils.errors import OutputError, ParseError, TactoidLabError
from utils.output import Table, csv_text, emit_outputs, format_number, json_text

MINIMAL = """\
# rectangle with uniform data
domain.shape = rectangle
bc.kind = constant
solver.eps = 0.05
solver.L = 1.0   # penalty
"""


# -----------------------------
# PARSING
# -----------------------------
def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg["domain.shape"] == "rectangle"
    assert cfg["solver.L"] == 1.0
    assert cfg["grid.nx"] == 64
    assert cfg["solver.dt"] is None
    assert "grid.ny" in cfg.defaults and "solver.eps" not in cfg.defaults
    assert cfg.lines["solver.eps"] == 4
    assert set(cfg.values) == set(KEYS)


def test_echo_parses_back():
    cfg = parse_config(MINIMAL + "bc.a = 0.6\nsolver.dt = 1e-5\n")
    again = parse_config(cfg.echo())
    assert again.values == cfg.values


@pytest.mark.parametrize("text, fragment", [
    (MINIMAL + "bc.a = 1.2\n", "a in [0,1)"),
    (MINIMAL + "bc.shape = disk\n", "unknown key"),
    (MINIMAL + "solver.eps = 0.1\n", "duplicate key"),
    ("domain.shape = rectangle\nbc.kind = constant\nsolver.eps = 0.05\n", "missing required key"),
    (MINIMAL + "grid.nx = many\n", "cannot read"),
    (MINIMAL + "domain.shape rectangle\n", "expected"),
    (MINIMAL.replace("rectangle", "hexagon"), "expected one of"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as info:
        parse_config(text)
    assert fragment in str(info.value)
    assert info.value.exit_code == 2


def test_parse_error_names_key_and_line():
    with pytest.raises(ParseError) as info:
        parse_config(MINIMAL + "bc.a = 1.2\n")
    assert info.value.key == "bc.a"
    assert info.value.line == 6
    assert info.value.to_dict()["details"] == {"key": "bc.a", "line": 6}


def test_sim_config_uses_auto_time_step():
    sim = build_sim_config(parse_config(MINIMAL + "grid.nx = 17\ngrid.ny = 17\ndomain.width = 1.0\n"))
    assert sim.domain.shape == ShapeKind.RECTANGLE
    assert sim.dt is None
    echo = sim_config_echo(sim)
    assert echo["solver"]["dt_auto"]
    assert echo["solver"]["dt"] == sim.dt_bound


def test_domain_mismatch_is_reported_against_the_config():
    text = MINIMAL.replace("constant", "degree")
    with pytest.raises(ParseError) as info:
        build_sim_config(parse_config(text))
    assert info.value.key == "domain.shape"


def test_environment_settings(monkeypatch, tmp_path):
    monkeypatch.setenv("TACTOIDLAB_LOG_LEVEL", "debug")
    monkeypatch.setenv("TACTOIDLAB_OUTPUT_DIR", str(tmp_path))
    assert log_level() == "DEBUG"
    assert output_dir() == tmp_path


# -----------------------------
# WORKERS
# -----------------------------
def test_worker_count_from_environment(monkeypatch):
    monkeypatch.setenv("TACTOIDLAB_THREADS", "3")
    assert worker_count() == 3
    for bad in ("0", "-2", "four"):
        monkeypatch.setenv("TACTOIDLAB_THREADS", bad)
        with pytest.raises(ParseError):
            worker_count()


@pytest.mark.parametrize("threads", ["1", "4"])
def test_parallel_map_keeps_order(monkeypatch, threads):
    monkeypatch.setenv("TACTOIDLAB_THREADS", threads)
    assert parallel_map(lambda x: x * x, range(10)) == [x * x for x in range(10)]


# -----------------------------
# OUTPUT
# -----------------------------
def test_number_format():
    assert format_number(7) == "7"
    assert format_number(np.int64(-3)) == "-3"
    assert format_number(0.1) == "0.10000000000000001"
    assert float(format_number(np.pi)) == np.pi


def test_empty_table_is_header_only():
    assert Table(("curve", "s", "x", "y"), []).render() == "curve,s,x,y\n"


def test_csv_text_is_deterministic():
    rows = np.random.default_rng(5).normal(size=(20, 3))
    first, second = csv_text(("a", "b", "c"), rows), csv_text(("a", "b", "c"), rows.copy())
    assert first == second
    back = np.loadtxt(first.splitlines(), delimiter=",", skiprows=1)
    assert np.array_equal(back, rows)


def test_emit_outputs_writes_files_and_manifest(tmp_path):
    out = tmp_path / "run"
    table = Table(("x", "y"), [[1.0, 2.0], [3.0, 4.5]])
    manifest = emit_outputs({"a.csv": table, "summary.json": {"total": 0.5, "arr": np.arange(3)}},
                            out, config={"eps": 0.05}, seed=11)
    assert (out / "a.csv").read_text() == "x,y\n1,2\n3,4.5\n"
    assert json.loads((out / "summary.json").read_text()) == {"arr": [0, 1, 2], "total": 0.5}
    sizes = {f["name"]: f["bytes"] for f in manifest.files}
    assert sizes["a.csv"] == (out / "a.csv").stat().st_size
    doc = json.loads((out / "manifest.json").read_text())
    assert doc["seed"] == 11
    assert doc["config"] == {"eps": 0.05}
    assert [f["name"] for f in doc["files"]] == ["a.csv", "summary.json"]


def test_emit_outputs_reports_unwritable_directory(tmp_path):
    blocker = tmp_path / "taken"
    blocker.write_text("not a directory")
    with pytest.raises(OutputError) as info:
        emit_outputs({"a.txt": "x"}, blocker)
    assert info.value.exit_code == 4
    assert isinstance(info.value, TactoidLabError)


def test_json_text_sorts_keys():
    assert json_text({"b": 1, "a": np.float64(0.25)}) == '{\n  "a": 0.25,\n  "b": 1\n}\n'


def test_failed_write_leaves_no_results(tmp_path):
    out = tmp_path / "run"
    (out / "b.csv").mkdir(parents=True)
    with pytest.raises(OutputError):
        emit_outputs({"a.csv": "x\n1\n", "b.csv": "y\n2\n"}, out)
    assert sorted(p.name for p in out.iterdir()) == ["b.csv"]
    assert (out / "b.csv").is_dir()
