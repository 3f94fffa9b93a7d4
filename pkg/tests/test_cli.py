"""
Tests for the qrmax command line entry point.
"""
import copy
import csv

import pytest

from qrmax import main

IDENTITY = {
    "dimension": 2,
    "seed": 1,
    "set": {"kind": "full-space"},
    "map": {"type": "building-block", "block": "identity"},
    "plan": {
        "r_grid": {"spacing": "linear", "min": 0.5, "max": 2.0, "count": 4},
        "samples_per_sphere": 64,
        "distortion": {"samples": 10, "probe_radius": 1e-4},
    },
    "output": {"prefix": "ident"},
}


@pytest.mark.integration
def test_all_writes_outputs_and_passes(test_env_vars, write_config, tmp_path, capsys):
    out_dir = tmp_path / "out"
    code = main(["all", "--config", str(write_config(IDENTITY)), "--out-dir", str(out_dir)])
    assert code == 0
    assert "PASS" in capsys.readouterr().out
    for name in ("ident.csv", "ident.json", "ident_timings.json", "ident.svg"):
        assert (out_dir / name).exists()
    assert not (out_dir / "ident.png").exists()
    with open(out_dir / "ident.csv", encoding="utf-8") as f:
        header = next(csv.reader(f))
    assert header == ["r", "M_est", "argmax_count", "hausdorff", "in_exceptional"]


@pytest.mark.integration
def test_single_stage_command(test_env_vars, write_config, tmp_path):
    out_dir = tmp_path / "maxmod"
    assert main(["maxmod", "--config", str(write_config(IDENTITY)), "--out-dir", str(out_dir), "--workers", "1"]) == 0
    assert (out_dir / "ident.csv").exists()


@pytest.mark.integration
def test_failing_suite_exits_one(test_env_vars, write_config, small_spiral_config, tmp_path, capsys):
    data = copy.deepcopy(small_spiral_config)
    data["plan"]["bound_factor"] = 0.0
    code = main(["verify", "--config", str(write_config(data)), "--out-dir", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL mms_matches_target" in out


def test_missing_config_exits_two(test_env_vars, tmp_path, capsys):
    code = main(["build", "--config", str(tmp_path / "nope.json"), "--out-dir", str(tmp_path)])
    assert code == 2
    assert "ERROR" in capsys.readouterr().out


def test_invalid_config_exits_two(test_env_vars, write_config, tmp_path):
    data = copy.deepcopy(IDENTITY)
    data["map"] = {"type": "polynomial", "degree": 1}
    assert main(["build", "--config", str(write_config(data)), "--out-dir", str(tmp_path)]) == 2


def test_out_of_scope_config_exits_two(test_env_vars, write_config, tmp_path):
    data = copy.deepcopy(IDENTITY)
    data["dimension"] = 3
    data["map"] = {"type": "transcendental"}
    assert main(["build", "--config", str(write_config(data)), "--out-dir", str(tmp_path)]) == 2


def test_unknown_command_is_usage_error(write_config):
    with pytest.raises(SystemExit) as excinfo:
        main(["plot", "--config", str(write_config(IDENTITY))])
    assert excinfo.value.code == 2
