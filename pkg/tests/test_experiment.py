"""
Integration tests for the experiment pipeline and the report writer.
"""
import copy
import csv
import json

import numpy as np
import pytest

from experiment_config import ExperimentConfig
from experiment_pipeline import STAGES, build_experiment, describe_build, run_experiment
from report_writer import csv_row, emit_outputs
from utils.error_handler import SetValidationError


def _identity_config(dimension=2):
    return ExperimentConfig.from_dict({
        "dimension": dimension,
        "seed": 1,
        "set": {"kind": "full-space"},
        "map": {"type": "building-block", "block": "identity"},
        "plan": {
            "r_grid": {"spacing": "linear", "min": 0.0, "max": 2.0, "count": 3},
            "samples_per_sphere": 128 if dimension == 2 else 200,
            "distortion": {"samples": 10, "probe_radius": 1e-4},
        },
    })


@pytest.mark.unit
def test_build_polynomial_experiment(small_spiral_config):
    built = build_experiment(ExperimentConfig.from_dict(small_spiral_config))
    assert built.claims_target
    assert built.composite.name == "P o h1"
    assert built.power.degree == 2
    assert built.gluing is None
    info = describe_build(built)
    assert info["power"]["topological_degree"] == 2
    assert info["set"]["kind"] == "log-spiral"
    assert "pullback" in info


@pytest.mark.unit
def test_build_transcendental_experiment():
    config = ExperimentConfig.from_dict({
        "dimension": 2,
        "seed": 3,
        "set": {"kind": "radial-ray", "direction": [1.0, 0.0]},
        "map": {"type": "transcendental", "epsilon": 0.5,
                "schedule": {"rule": "explicit", "radii": [2.0, 5.0, 13.0]}},
    })
    built = build_experiment(config)
    assert built.power is None
    assert built.gluing is not None
    schedule_info = describe_build(built)["schedule"]
    assert len(schedule_info["blend_zero_radii"]) == 2
    assert [d["R"] for d in schedule_info["exceptional_density"]] == [5.0, 13.0]


@pytest.mark.integration
def test_run_experiment_small_spiral(small_spiral_config):
    report = run_experiment(ExperimentConfig.from_dict(small_spiral_config), workers=1)
    assert report.stages == list(STAGES)
    assert report.passed, [c.detail for s in report.suites for c in s.checks if not c.passed]
    assert {s.name for s in report.suites} == {"zorich", "pullback", "shrink", "modulus_gap", "mms"}
    assert len(report.rows) == 6
    for row in report.rows:
        assert row["in_exceptional"] is False
        assert np.isfinite(row["hausdorff"])
        assert row["M_est"] == pytest.approx(row["r"] ** 2, rel=1e-6)
    assert report.mms_points.shape[1] == 2
    assert set(report.distortion) == {"h", "h1"}


@pytest.mark.integration
def test_stage_selection_limits_work(small_spiral_config):
    report = run_experiment(ExperimentConfig.from_dict(small_spiral_config), stages=["build", "maxmod"])
    assert report.stages == ["build", "maxmod"]
    assert report.comparison is None
    assert report.suites == []
    assert all(np.isnan(row["hausdorff"]) for row in report.rows)
    assert "maxmod" in report.timings and "verify" not in report.timings


@pytest.mark.unit
def test_building_block_without_target_claim():
    report = run_experiment(_identity_config(3))
    assert report.suites == []
    assert report.passed
    assert "plane plot omitted for n = 3" in report.notes
    assert [row["M_est"] for row in report.rows] == pytest.approx([0.0, 1.0, 2.0])


@pytest.mark.unit
def test_target_missing_spheres_is_rejected(small_spiral_config):
    data = copy.deepcopy(small_spiral_config)
    data["set"] = {"kind": "sphere", "radius": 1.0}
    with pytest.raises(SetValidationError):
        run_experiment(ExperimentConfig.from_dict(data), stages=["build"])


@pytest.mark.unit
def test_csv_row_format():
    row = {"r": 0.2, "M_est": 1.0 / 3.0, "argmax_count": 3, "hausdorff": float("nan"), "in_exceptional": True}
    assert csv_row(row) == ["0.2", "0.333333333333", "3", "nan", "true"]


@pytest.mark.integration
def test_emit_outputs_writes_artifacts(tmp_path):
    report = run_experiment(_identity_config(2))
    written = emit_outputs(report, tmp_path, "ident")
    assert set(written) == {"csv", "svg", "json", "timings"}

    with open(written["csv"], encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["r", "M_est", "argmax_count", "hausdorff", "in_exceptional"]
    assert [r[0] for r in rows[1:]] == ["0", "1", "2"]

    payload = json.loads(written["json"].read_text(encoding="utf-8"))
    assert payload["plot"] == "ident.svg"
    assert payload["properties"]["passed"] is True
    assert "timings" not in payload
    assert written["svg"].read_text(encoding="utf-8").lstrip().startswith("<")


@pytest.mark.integration
def test_runs_are_reproducible(tmp_path, small_spiral_config):
    config = ExperimentConfig.from_dict(small_spiral_config)
    first = emit_outputs(run_experiment(config, workers=1), tmp_path / "a", "run")
    second = emit_outputs(run_experiment(config, workers=3), tmp_path / "b", "run")
    for name in ("csv", "json", "svg"):
        assert first[name].read_bytes() == second[name].read_bytes()


@pytest.mark.unit
def test_csv_matches_golden_table(tmp_path):
    from pathlib import Path

    from experiment_pipeline import RunReport
    from report_writer import write_csv

    report = RunReport(config={"dimension": 2}, stages=["maxmod"], rows=[
        {"r": 0.1, "M_est": 0.1 ** 2, "argmax_count": 2, "hausdorff": 1.5e-4, "in_exceptional": False},
        {"r": 1.0 / 3.0, "M_est": 1e20 / 3.0, "argmax_count": 4, "hausdorff": 0.0, "in_exceptional": False},
        {"r": 12.5, "M_est": 156.25, "argmax_count": 1, "hausdorff": float("nan"), "in_exceptional": True},
    ])
    path = write_csv(report, tmp_path / "table.csv")
    golden = Path(__file__).parent / "fixtures" / "golden_table.csv"
    assert path.read_text(encoding="utf-8") == golden.read_text(encoding="utf-8")


@pytest.mark.slow
def test_shipped_ray_config_passes():
    from pathlib import Path

    config = ExperimentConfig.load(Path(__file__).parent.parent / "configs" / "ray_polynomial.json")
    report = run_experiment(config)
    assert report.passed, [c.detail for s in report.suites for c in s.checks if not c.passed]
    assert report.comparison.max_hausdorff < 1e-6


@pytest.mark.integration
def test_transcendental_spiral_matches_target_off_exceptional_set():
    config = ExperimentConfig.from_dict({
        "dimension": 2,
        "seed": 11,
        "set": {"kind": "log-spiral", "omega": 1.0},
        "map": {"type": "transcendental", "epsilon": 0.5,
                "schedule": {"rule": "explicit", "radii": [2.0, 5.0, 13.0]}},
        "plan": {
            "r_grid": {"spacing": "geometric", "min": 0.1, "max": 20.0, "count": 40},
            "samples_per_sphere": 2048,
            "exclude_exceptional": True,
        },
    })
    report = run_experiment(config, stages=["build", "maxmod", "mms"], workers=1)
    comparison = report.comparison
    assert comparison.exclude_exceptional
    assert comparison.passed, [(row.radius, row.hausdorff, row.bound) for row in comparison.rows if not row.passed]
    flagged = [row for row in comparison.rows if row.in_exceptional]
    checked = [row for row in comparison.rows if not row.skipped]
    assert flagged and checked
    assert all(row.skipped for row in flagged)
    assert all(row.hausdorff <= row.bound for row in checked)
    for row, table_row in zip(comparison.rows, report.rows):
        assert table_row["in_exceptional"] is row.in_exceptional
        assert np.isnan(table_row["hausdorff"]) == row.skipped
