import json
import subprocess
import sys

import pytest

from h2contain import cli
from h2contain.report import render_json


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def short_sim_file(homog_model_path, tmp_path):
    data = json.loads(homog_model_path.read_text())
    data["simulation"]["T"] = 0.2
    data["simulation"]["disturbance"]["amplitude"] = 5.0
    path = tmp_path / "short.json"
    path.write_text(json.dumps(data))
    return path


def test_validate_golden(capsys, homog_model_path, heterog_model_path):
    for path in (homog_model_path, heterog_model_path):
        code, out, _ = run_cli(capsys, "validate", str(path))
        assert code == 0
        assert "valid" in out


def test_validate_reports_assumption_violation(capsys, homog_model_path, tmp_path):
    data = json.loads(homog_model_path.read_text())
    data["graph"]["edges"].append([7, 8])
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, _, err = run_cli(capsys, "validate", str(bad))
    assert code == 3
    assert "graph" in err and "leader" in err


def test_validate_parse_error(capsys, homog_model_path, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text(homog_model_path.read_text()[:-25])
    code, _, err = run_cli(capsys, "validate", str(broken))
    assert code == 2
    assert "JSON" in err


def test_design_golden_homogeneous(capsys, homog_model_path):
    code, out, _ = run_cli(capsys, "design", str(homog_model_path))
    assert code == 0
    report = json.loads(out)
    assert report["accepted"] is True
    assert abs(report["h2_norm"] - 3.2966) <= 0.01
    assert abs(report["certificate"]["bound"] - 288.2621) <= 0.5


def test_design_golden_heterogeneous(capsys, heterog_model_path):
    code, out, _ = run_cli(capsys, "design", str(heterog_model_path))
    assert code == 0
    report = json.loads(out)
    assert abs(report["h2_norm"] - 6.2937) <= 0.01
    bounds = report["certificate"]["trace_bounds"]
    assert len(bounds) == 6
    assert max(bounds) < report["certificate"]["threshold"]


def test_design_gamma_override_rejected(capsys, homog_model_path):
    code, out, _ = run_cli(capsys, "design", str(homog_model_path),
                           "--gamma", "100")
    assert code == 4
    report = json.loads(out)
    assert report["accepted"] is False
    assert abs(report["certificate"]["bound"] - 288.2621) <= 0.5


def test_design_out_file_and_roundtrip(capsys, homog_model_path, tmp_path):
    out_path = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, "design", str(homog_model_path),
                           "--out", str(out_path))
    assert code == 0
    assert "H2 norm" in out  # human rendering on stdout when --out is used
    text = out_path.read_text()
    report = json.loads(text)
    assert render_json(report) == text  # byte-identical round trip
    assert not out_path.with_name(out_path.name + ".tmp").exists()
    # the two renderings agree on every number they both show
    for value in (report["h2_norm"], report["certificate"]["bound"],
                  report["gains"]["c_p"]):
        assert f"{value:.6g}" in out


def test_infeasible_regulation_is_a_solver_failure(capsys, heterog_model_path,
                                                   tmp_path):
    data = json.loads(heterog_model_path.read_text())
    # velocity coupling no longer matches the input gain: no exact regulation
    data["agents"][0]["A"][2][1] = -5.0
    bad = tmp_path / "infeasible.json"
    bad.write_text(json.dumps(data))
    code, _, err = run_cli(capsys, "design", str(bad))
    assert code == 5
    assert "regulator" in err.lower()


def test_h2_command_with_quadrature(capsys, homog_model_path):
    code, out, _ = run_cli(capsys, "h2", str(homog_model_path), "--quadrature")
    assert code == 0
    report = json.loads(out)
    assert abs(report["h2_norm"] - 3.2966) <= 0.01
    assert report["relative_gap"] <= 1e-3


def test_simulate_deterministic(capsys, short_sim_file, tmp_path):
    dirs = [tmp_path / "runA", tmp_path / "runB"]
    outputs = []
    for out_dir in dirs:
        code, out, _ = run_cli(capsys, "simulate", str(short_sim_file),
                               "--seed", "7", "--out-dir", str(out_dir))
        assert code == 0
        outputs.append(json.loads(out))
        assert (out_dir / "trace.csv").exists()
    assert outputs[0]["final_hull_error"] == outputs[1]["final_hull_error"]
    a = (dirs[0] / "trace.csv").read_bytes()
    b = (dirs[1] / "trace.csv").read_bytes()
    assert a == b


def test_simulate_svg_figures(capsys, short_sim_file, tmp_path):
    out_dir = tmp_path / "figs"
    code, out, _ = run_cli(capsys, "simulate", str(short_sim_file),
                           "--svg", "--out-dir", str(out_dir))
    assert code == 0
    report = json.loads(out)
    svgs = sorted(out_dir.glob("*.svg"))
    assert [p.name for p in svgs] == [
        "trace_hull_error.svg", "trace_performance.svg", "trace_states.svg",
    ]
    for p in svgs:
        assert str(p) in report["files"]
        assert p.read_text().lstrip().startswith("<?xml")


def test_simulate_rejected_design_writes_nothing(capsys, short_sim_file, tmp_path):
    out_dir = tmp_path / "never"
    code, out, _ = run_cli(capsys, "simulate", str(short_sim_file),
                           "--gamma", "100", "--out-dir", str(out_dir))
    assert code == 4
    assert json.loads(out)["accepted"] is False
    assert not (out_dir / "trace.csv").exists()


def test_simulate_requires_simulation_section(capsys, homog_model_path, tmp_path):
    data = json.loads(homog_model_path.read_text())
    data.pop("simulation")
    bare = tmp_path / "bare.json"
    bare.write_text(json.dumps(data))
    code, _, err = run_cli(capsys, "simulate", str(bare))
    assert code == 3
    assert "simulation" in err


def test_console_entry_point(homog_model_path):
    proc = subprocess.run(
        [sys.executable, "-m", "h2contain.cli", "validate", str(homog_model_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "valid" in proc.stdout
