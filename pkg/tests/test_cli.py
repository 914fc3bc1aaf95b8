import json
import math

import numpy as np
import pytest

from main import build_parser, run
from views.output_view import render_csv, render_json

QUARTER_PERIOD = {"t_a": 0.0, "t_b": math.pi / 2, "profile": {"kind": "constant", "params": {"omega": 1.0}}}
UNIT = {"t_a": 0.0, "t_b": 1.0, "profile": {"kind": "constant", "params": {"omega": 1.0}}}


@pytest.fixture
def write_config(tmp_path):
    def write(payload, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return write


def test_diagrams_for_quartic_vertex(write_config, tmp_path):
    out = tmp_path / "census.json"
    code = run(["diagrams", "--config", write_config({**UNIT, "diagrams": {"vertex": "x^4"}}), "--out", str(out)])
    assert code == 0
    result = json.loads(out.read_text(encoding="utf-8"))
    assert sorted(s["multiplicity"] for s in result["signatures"]) == [24, 72]
    assert result["connected_total"] == 96
    assert result["disconnected"] == 9


def test_greens_grid_midpoint(write_config, tmp_path):
    out = tmp_path / "greens.csv"
    config = write_config({**QUARTER_PERIOD, "greens": {"channel": "jj", "points": 11}})
    assert run(["greens", "--config", config, "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,t2,value"
    assert len(lines) == 1 + 121
    t, t2, value = map(float, lines[1 + 60].split(","))
    assert t == pytest.approx(math.pi / 4) and t2 == pytest.approx(math.pi / 4)
    assert value == pytest.approx(0.5, rel=1e-9)


def test_fundamental_export(write_config, tmp_path):
    out = tmp_path / "fundamental.csv"
    config = write_config({**QUARTER_PERIOD, "n_steps": 64, "greens": {"export": "fundamental"}})
    assert run(["greens", "--config", config, "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,Da,Da_dot,Db,Db_dot"
    assert len(lines) == 1 + 65
    assert float(lines[-1].split(",")[1]) == pytest.approx(1.0, abs=1e-6)


def test_malformed_config_exits_with_config_error(write_config, tmp_path, capsys):
    out = tmp_path / "out.csv"
    config = write_config({"t_a": 0.0, "t_b": 1.0})
    assert run(["greens", "--config", config, "--out", str(out)]) == 2
    assert not out.exists()
    assert "config_error" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["explode", "--config", "x.json", "--out", "y.json"],
        ["greens", "--config", "x.json"],
        ["greens", "--config", "x.json", "--out", "y.json", "--threads", "0"],
        ["greens", "--config", "does-not-exist.json", "--out", "y.json"],
    ],
)
def test_bad_invocations_are_config_errors(argv):
    assert run(argv) == 2


def test_caustic_exits_with_computation_error(write_config, tmp_path, capsys):
    out = tmp_path / "greens.csv"
    config = write_config({"t_a": 0.0, "t_b": math.pi, "profile": {"kind": "constant", "params": {"omega": 1.0}}})
    assert run(["greens", "--config", config, "--out", str(out)]) == 3
    assert not out.exists()
    assert "caustic" in capsys.readouterr().err


def test_unknown_vertex_is_a_computation_error(write_config, tmp_path):
    out = tmp_path / "census.json"
    assert run(["diagrams", "--config", write_config({**UNIT, "diagrams": {"vertex": "y^4"}}), "--out", str(out)]) == 3
    assert not out.exists()


def test_correlator_second_moment_and_mode_override(write_config, tmp_path):
    section = {"times_x": [0.3], "functions": [{"kind": "polynomial", "coefficients": [0.0, 0.0, 1.0]}]}
    config = write_config({**QUARTER_PERIOD, "correlator": section})
    expected = math.sin(0.6) / 2

    out = tmp_path / "fresnel.json"
    assert run(["correlator", "--config", config, "--out", str(out)]) == 0
    result = json.loads(out.read_text(encoding="utf-8"))
    assert set(result) == {"value_re", "value_im", "mode", "det_crosscheck", "n_positions", "n_momenta"}
    assert result["mode"] == "fresnel"
    assert result["value_re"] == 0.0
    assert result["value_im"] == pytest.approx(expected, rel=1e-8)

    out = tmp_path / "euclidean.json"
    assert run(["correlator", "--config", config, "--out", str(out), "--mode", "euclidean"]) == 0
    result = json.loads(out.read_text(encoding="utf-8"))
    assert result["mode"] == "euclidean"
    assert result["value_re"] == pytest.approx(expected, rel=1e-8)


def test_correlator_needs_its_section(write_config, tmp_path):
    out = tmp_path / "correlator.json"
    assert run(["correlator", "--config", write_config(UNIT), "--out", str(out)]) == 2


def test_amplitude_partition_functional(write_config, tmp_path):
    out = tmp_path / "z.json"
    config = write_config({**UNIT, "amplitude": {"representation": "periodic"}})
    assert run(["amplitude", "--config", config, "--out", str(out)]) == 0
    result = json.loads(out.read_text(encoding="utf-8"))
    assert result["representation"] == "periodic"
    assert result["value_re"] == pytest.approx(0.0, abs=1e-9)
    assert result["value_im"] == pytest.approx(-1.0 / math.sqrt(2 - 2 * math.cos(1.0)), rel=1e-9)


def test_amplitude_with_impulse_current(write_config, tmp_path):
    out = tmp_path / "amp.json"
    amplitude = {"representation": "x", "start": 0.1, "end": 0.4, "j": {"impulses": [[0.5, 0.2]]}}
    assert run(["amplitude", "--config", write_config({**UNIT, "amplitude": amplitude}), "--out", str(out)]) == 0
    result = json.loads(out.read_text(encoding="utf-8"))
    assert set(result) >= {"action_re", "prefactor_re", "value_re", "value_im"}


def test_stdout_target(write_config, capsys):
    assert run(["diagrams", "--config", write_config({**UNIT, "diagrams": {"vertex": "x^2"}}), "--out", "-"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["connected_total"] == 2


def test_validate_is_hidden_from_help():
    text = build_parser().format_help()
    assert "validate" not in text
    for command in ("greens", "amplitude", "correlator", "diagrams"):
        assert command in text


def test_csv_and_json_share_float_formatting():
    values = [0.1, 1.0 / 3.0, -2.5e-17, np.float64(math.pi)]
    csv_cells = render_csv(["v"], [[v] for v in values]).splitlines()[1:]
    json_cells = [line.strip().rstrip(",") for line in render_json({"v": values}).splitlines()[2:-2]]
    assert csv_cells == json_cells == ["0.1", "0.3333333333333333", "-2.5e-17", "3.141592653589793"]
