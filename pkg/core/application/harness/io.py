"""Run artifacts on disk: trace, metrics, ledgers and summary."""

from __future__ import annotations

from pathlib import Path
from typing import Any

from core.infrastructure.formatters.csv_writer import write_rows
from core.infrastructure.formatters.json_writer import SummaryJsonWriter
from core.simulation.engine import SimulationResult
from core.simulation.metrics import CSV_COLUMNS
from core.simulation.trace import write_trace

TRACE_FILENAME = "trace.txt"
METRICS_FILENAME = "metrics.csv"
SUMMARY_FILENAME = "summary.json"
LEDGERS_DIRNAME = "ledgers"


def ledger_path(out_dir: str | Path, replica: int) -> Path:
    return Path(out_dir) / LEDGERS_DIRNAME / f"replica-{replica}.txt"


def write_run_artifacts(
    result: SimulationResult, summary: dict[str, Any], out_dir: str | Path
) -> dict[str, str]:
    """Persist every artifact of one run and return their paths by name."""
    out = Path(out_dir).expanduser().resolve()
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "trace": str(write_trace(out / TRACE_FILENAME, result.trace)),
        "metrics": write_rows(out / METRICS_FILENAME, CSV_COLUMNS, result.metrics.rows),
    }
    for replica, lines in result.ledger_lines().items():
        target = ledger_path(out, replica)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text("".join(f"{line}\n" for line in lines), encoding="ascii")
    paths["ledgers"] = str(out / LEDGERS_DIRNAME)
    paths["summary"] = SummaryJsonWriter(SUMMARY_FILENAME).write(summary, out)
    return paths
