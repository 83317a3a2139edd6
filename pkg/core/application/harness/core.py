"""Single-run orchestration: simulate, check, persist."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from core.consensus.ledger import LedgerDiff, diff_ledgers, parse_lines
from core.infrastructure.config.scenario import scenario_to_mapping
from core.infrastructure.logging.structured import get_logger
from core.simulation.checker import ViolationReport, check_trace
from core.simulation.engine import Simulation, SimulationResult
from core.simulation.scenario import Scenario
from core.simulation.trace import read_trace

from .io import write_run_artifacts

logger = get_logger(__name__)

# Violations listed in summary.json; counts always cover all of them.
MAX_LISTED_VIOLATIONS = 50


@dataclass(slots=True)
class RunOutcome:
    result: SimulationResult
    report: ViolationReport
    paths: dict[str, str] = field(default_factory=dict)
    wall_ms: int = 0

    @property
    def ok(self) -> bool:
        return self.report.ok


def build_summary(result: SimulationResult, report: ViolationReport) -> dict[str, Any]:
    return {
        "scenario": scenario_to_mapping(result.scenario),
        "faulty": sorted(result.faulty),
        "metrics": result.metrics.summary(),
        "all_committed": result.all_committed,
        "violation_counts": report.counts(),
        "violations": [
            {"kind": v.kind, "index": v.index, "detail": v.detail}
            for v in report.violations[:MAX_LISTED_VIOLATIONS]
        ],
    }


def execute_run(scenario: Scenario, out_dir: str | Path | None = None) -> RunOutcome:
    """Simulate `scenario`, check its trace and (optionally) write artifacts.

    Raises:
        ConfigInvalid: the scenario is invalid.
        OSError: artifacts cannot be written.
    """
    t0 = time.time()
    result = Simulation(scenario).run()
    report = check_trace(result.trace)
    outcome = RunOutcome(result=result, report=report)
    if out_dir is not None:
        outcome.paths = write_run_artifacts(result, build_summary(result, report), out_dir)
    outcome.wall_ms = int((time.time() - t0) * 1000)
    logger.info(
        "run finished",
        seed=scenario.seed,
        adversary=scenario.adversary.program,
        violations=len(report.violations),
        wall_ms=outcome.wall_ms,
    )
    return outcome


def check_trace_file(path: str | Path) -> ViolationReport:
    """Re-check a stored trace.

    Raises:
        FileNotFoundError: missing file.
        TraceFormatError: undecodable line.
    """
    return check_trace(read_trace(Path(path)))


def ledger_diff_files(path_a: str | Path, path_b: str | Path) -> LedgerDiff:
    """Compare two exported ledger files.

    Raises:
        FileNotFoundError: missing file.
        MalformedMessage: a line is not an encoded block.
    """
    with Path(path_a).open(encoding="ascii") as a, Path(path_b).open(encoding="ascii") as b:
        return diff_ledgers(parse_lines(a), parse_lines(b))
