"""
Report writer: CSV table, JSON report, timings and the planar plots.
"""
import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from config.constants import CSV_COLUMNS, format_decimal
from experiment_pipeline import RunReport
from renderers import RendererFactory
from utils.error_handler import OutputError, safe_execute

logger = logging.getLogger(__name__)


def _json_ready(value: Any) -> Any:
    """Plain JSON types with floats rounded to the report precision; nan -> null."""
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_ready(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(format_decimal(value))
    return value


def csv_row(row: Dict[str, Any]) -> list:
    return [
        format_decimal(row["r"]),
        format_decimal(row["M_est"]),
        str(int(row["argmax_count"])),
        format_decimal(row["hausdorff"]),
        "true" if row["in_exceptional"] else "false",
    ]


def write_csv(report: RunReport, path: Path) -> Path:
    """Per-radius table with the fixed column contract."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in report.rows:
                writer.writerow(csv_row(row))
    except OSError as e:
        raise OutputError(f"cannot write CSV table: {e}", path=str(path))
    return path


def write_json(payload: Dict[str, Any], path: Path) -> Path:
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_json_ready(payload), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise OutputError(f"cannot write JSON report: {e}", path=str(path))
    return path


@safe_execute(default_return=None)
def render_overlay(report: RunReport, path: Path, backend: str) -> Optional[Path]:
    renderer = RendererFactory.create(backend)
    title = f"{report.config['set'].get('kind', '')}: T (blue) and M-set samples (red)"
    return renderer.render(report.target_points, report.mms_points, path, title)


def emit_outputs(
    report: RunReport,
    out_dir: Path,
    prefix: str,
    png_preview: bool = False,
) -> Dict[str, Path]:
    """
    Write all artifacts of a run.

    Returns:
        Dict of artifact name -> path
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"cannot create output directory: {e}", path=str(out_dir))

    written: Dict[str, Path] = {}
    payload = report.to_dict()
    if report.rows:
        written["csv"] = write_csv(report, out_dir / f"{prefix}.csv")

    if report.dimension == 2 and report.mms_points is not None:
        svg = render_overlay(report, out_dir / f"{prefix}.svg", "svg")
        if svg is not None:
            written["svg"] = svg
            payload["plot"] = svg.name
        else:
            payload["plot"] = None
            payload["notes"] = payload["notes"] + ["SVG rendering failed"]
        if png_preview:
            png = render_overlay(report, out_dir / f"{prefix}.png", "png")
            if png is not None:
                written["png"] = png
    else:
        payload["plot"] = None

    written["json"] = write_json(payload, out_dir / f"{prefix}.json")
    written["timings"] = write_json(report.timings, out_dir / f"{prefix}_timings.json")
    for name, path in written.items():
        logger.info(f"[Output] {name}: {path}")
    return written
