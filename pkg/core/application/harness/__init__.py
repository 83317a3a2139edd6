"""Harness application module.

- core: single run (simulate, check, persist), trace re-check, ledger diff
- campaign: seeds x adversaries x schemes x sizes safety grid
- latency: message-delay throughput grid
- report: console rendering
- io: artifact files
"""

from __future__ import annotations

from core.application.harness.campaign import CampaignSpec, CampaignSummary, run_campaign
from core.application.harness.core import (
    RunOutcome,
    check_trace_file,
    execute_run,
    ledger_diff_files,
)
from core.application.harness.latency import latency_grid

__all__ = [
    "CampaignSpec",
    "CampaignSummary",
    "RunOutcome",
    "check_trace_file",
    "execute_run",
    "latency_grid",
    "ledger_diff_files",
    "run_campaign",
]
