"""Run orchestration and artifact writing for the CLI.

Every task writes its CSV artifacts plus ``manifest.json`` into the output
directory. Floats are written with ``repr`` so identical inputs give
byte-identical CSVs.
"""

import csv
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from . import __version__
from .api.polarization import polarization_from_config
from .api.resonances import oracle_from_config, resonances_from_config
from .api.sweep import sweep_from_config
from .api.validation import validation_from_config
from .config import RunConfig
from .errors import EXIT_NUMERICAL, EXIT_OK, ResonanceError
from .types import DispersionRoot, Manifest, PolarizationRecord, ResonanceRecord, SweepRow, SweepSummary, ValidationCheck

logger = logging.getLogger(__name__)

RESONANCE_COLUMNS = list(ResonanceRecord.__annotations__)
POLARIZATION_COLUMNS = list(PolarizationRecord.__annotations__)
SWEEP_COLUMNS = list(SweepRow.__annotations__)
SUMMARY_COLUMNS = list(SweepSummary.__annotations__)
VALIDATION_COLUMNS = list(ValidationCheck.__annotations__)
DISPERSION_COLUMNS = list(DispersionRoot.__annotations__)


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, columns: list[str], rows: list[Any]) -> None:
    """Write rows (dicts) with a fixed header; an empty list still gets the header."""
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns, lineterminator="\n", restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(row[key]) for key in columns if key in row})


def _run_task(config: RunConfig, out: Path) -> tuple[list[str], int]:
    """Dispatch on the task; returns the artifact names and the exit code."""
    task = config.task
    if task == "resonances":
        rows = resonances_from_config(config)["resonances"]
        write_csv(out / "resonances.csv", RESONANCE_COLUMNS, rows)
        return ["resonances.csv"], EXIT_OK
    if task == "polarization":
        write_csv(out / "polarization.csv", POLARIZATION_COLUMNS, polarization_from_config(config))
        return ["polarization.csv"], EXIT_OK
    if task == "sweep":
        result = sweep_from_config(config)
        write_csv(out / "sweep.csv", SWEEP_COLUMNS, result["rows"])
        write_csv(out / "sweep_summary.csv", SUMMARY_COLUMNS, [result["summary"]])
        return ["sweep.csv", "sweep_summary.csv"], EXIT_OK
    if task == "validate":
        result = validation_from_config(config)
        write_csv(out / "validation.csv", VALIDATION_COLUMNS, result["checks"])
        return ["validation.csv"], EXIT_OK if result["passed"] else EXIT_NUMERICAL
    if task == "oracle":
        write_csv(out / "dispersion.csv", DISPERSION_COLUMNS, oracle_from_config(config))
        return ["dispersion.csv"], EXIT_OK
    raise ValueError(f"Unknown task {task!r}")


def build_manifest(config: RunConfig, artifacts: list[str], elapsed: float) -> Manifest:
    return {
        "schema_version": config.schema_version,
        "task": config.task,
        "package_version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "seed": config.seed,
        "thresholds": {key: float(value) for key, value in asdict(config.tolerances).items()},
        "config": config.to_dict(),
        "artifacts": artifacts,
        "elapsed_seconds": elapsed,
    }


def _write_error(config: RunConfig, out: Path, error: ResonanceError, elapsed: float) -> int:
    logger.error("%s failed after %.3fs: %s", config.task, elapsed, error.message)
    report = error.to_report()
    (out / "error.json").write_text(json.dumps(report, indent=2, sort_keys=True), encoding="utf-8")
    print(json.dumps(report, sort_keys=True), file=sys.stderr)
    return error.exit_code


def cli_run(config: RunConfig, output_dir: str | Path | None = None) -> int:
    """Execute one configured task and write its artifacts.

    Args:
        config: Parsed run configuration.
        output_dir: Overrides ``config.output_dir``.

    Returns:
        Exit code: 0 on success, 1 on a numerical failure (or a failed validation),
        2 on a configuration error. Errors are reported as JSON on stderr and
        written to ``error.json``.
    """
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.time()
    try:
        artifacts, code = _run_task(config, out)
    except ResonanceError as e:
        return _write_error(config, out, e, time.time() - start)
    except Exception as e:
        logger.exception("Unexpected %s in %s", type(e).__name__, config.task)
        error = ResonanceError(f"Unexpected {type(e).__name__}: {e}", exception=type(e).__name__)
        return _write_error(config, out, error, time.time() - start)

    elapsed = time.time() - start
    manifest = build_manifest(config, artifacts, elapsed)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    logger.info("%s completed in %.3fs; wrote %s", config.task, elapsed, ", ".join(artifacts))
    return code
