#!/usr/bin/env python3
"""
qrmax: quasiregular maps with a prescribed maximum modulus set.

Usage:
    qrmax <build|maxmod|mms|distortion|verify|all> --config PATH [--out-dir PATH] [--workers N]

Exit status: 0 when every executed property suite passes, 1 when a suite
fails, 2 on configuration, scope or I/O errors, 3 on internal errors.
"""
from __future__ import annotations

import argparse
import logging
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables FIRST before reading settings
BASE = Path(__file__).parent.resolve()
load_dotenv(BASE / ".env")

from config.settings import get_settings
from experiment_config import ExperimentConfig
from experiment_pipeline import STAGES, run_experiment
from report_writer import emit_outputs
from utils.error_handler import QRMaxError, exit_code_for, log_error

logger = logging.getLogger("qrmax")

SUBCOMMANDS = STAGES + ("all",)


def _print_summary(report, written) -> None:
    for suite in report.suites:
        for check in suite.checks:
            mark = "PASS" if check.passed else ("FAIL" if check.is_critical else "WARN")
            print(f"[{suite.name}] {mark} {check.name}: {check.detail}")
    if report.rows:
        worst = max((row["hausdorff"] for row in report.rows if row["hausdorff"] == row["hausdorff"]), default=None)
        tail = f", max Hausdorff {worst:.3g}" if worst is not None else ""
        print(f"[table] {len(report.rows)} radii{tail}")
    for name, path in written.items():
        print(f"[output] {name}: {path}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Build and verify quasiregular maps with prescribed maximum modulus sets")
    parser.add_argument("command", choices=SUBCOMMANDS, help="Stage to run ('all' runs every stage)")
    parser.add_argument("--config", required=True, help="Experiment config (JSON)")
    parser.add_argument("--out-dir", default=None, help="Output directory (overrides the config)")
    parser.add_argument("--workers", type=int, default=None, help="Worker threads (default: QRMAX_THREADS)")
    args = parser.parse_args(argv)

    settings = get_settings()
    logging.basicConfig(
        level=getattr(logging, settings.logging.level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = ExperimentConfig.load(args.config)
        stages = STAGES if args.command == "all" else ("build", args.command)
        workers = args.workers or settings.runtime.threads
        report = run_experiment(config, stages, workers=workers)
        out_dir = Path(args.out_dir or config.output.dir or settings.output.output_dir)
        written = emit_outputs(report, out_dir, config.output.prefix, settings.output.write_png_preview)
    except QRMaxError as e:
        log_error(e)
        print(f"ERROR {e}")
        return exit_code_for(e)
    except Exception as e:
        logger.exception(f"internal error: {e}")
        print(f"ERROR internal: {e}")
        return exit_code_for(e)

    _print_summary(report, written)
    if report.passed:
        print("✅  PASS")
        return 0
    print("❌  FAIL")
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
