"""Application layer: run orchestration on top of the simulator."""

from .harness import check_trace_file, execute_run, latency_grid, ledger_diff_files, run_campaign

__all__ = [
    "check_trace_file",
    "execute_run",
    "latency_grid",
    "ledger_diff_files",
    "run_campaign",
]
