"""Console reporting for runs, campaigns and latency grids."""

from __future__ import annotations

from typing import Any

from core.resources.templates import (
    CAMPAIGN_SUMMARY,
    CHECK_SUMMARY,
    LATENCY_SUMMARY,
    RUN_SUMMARY,
    render_template,
)
from core.ui.console import line, summary_panel

from .core import RunOutcome


def render_run_report(outcome: RunOutcome, verbose: bool = False) -> str:
    result = outcome.result
    scenario = result.scenario
    report = outcome.report
    body = render_template(
        RUN_SUMMARY,
        scenario=scenario,
        adversary=scenario.adversary.program,
        faulty=sorted(result.faulty),
        metrics=result.metrics,
        all_committed=result.all_committed,
        counts={k: v for k, v in report.counts().items() if v},
        violations=report.violations[:10] if verbose else [],
        paths=outcome.paths,
        wall_ms=outcome.wall_ms,
    )
    summary_panel("Run Report", body)
    return body


def render_campaign_report(totals: dict[str, Any], paths: dict[str, str]) -> str:
    body = render_template(CAMPAIGN_SUMMARY, totals=totals, paths=paths)
    summary_panel("Campaign Report", body)
    return body


def render_latency_report(rows: list[dict[str, Any]], path: str) -> str:
    body = render_template(LATENCY_SUMMARY, rows=rows, path=path)
    summary_panel("Latency Bench", body)
    return body


def render_check_report(source: str, counts: dict[str, int], total: int, transitions: int) -> None:
    line(
        render_template(
            CHECK_SUMMARY,
            source=source,
            counts={k: v for k, v in counts.items() if v},
            total=total,
            transitions=transitions,
        )
    )
