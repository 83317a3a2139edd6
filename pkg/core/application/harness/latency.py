"""Message-delay throughput grid.

Each cell runs the latency scenario: fixed delays, no authentication, no
timers, one open-loop client and a primary that keeps at most `window`
proposals in flight. Throughput is decisions per unit of virtual time.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable
from typing import Any

from core.simulation.engine import Simulation
from core.simulation.scenario import Scenario

LATENCY_COLUMNS = ("n", "delay", "window", "decisions", "virtual_time", "throughput")
DEFAULT_DECISIONS = 500


def latency_cell(n: int, delay: float, window: int, decisions: int = DEFAULT_DECISIONS) -> dict[str, Any]:
    result = Simulation(Scenario.latency(n, delay, window, decisions)).run()
    metrics = result.metrics
    return {
        "n": n,
        "delay": delay,
        "window": window,
        "decisions": metrics.decisions,
        "virtual_time": metrics.virtual_time,
        "throughput": metrics.throughput,
    }


def latency_grid(
    sizes: Iterable[int],
    delays: Iterable[float],
    windows: Iterable[int],
    decisions: int = DEFAULT_DECISIONS,
    on_row: Callable[[dict[str, Any]], None] | None = None,
) -> list[dict[str, Any]]:
    rows: list[dict[str, Any]] = []
    for n in sizes:
        for delay in delays:
            for window in windows:
                rows.append(latency_cell(n, delay, window, decisions))
                if on_row is not None:
                    on_row(rows[-1])
    return rows


def speedup(rows: list[dict[str, Any]], window: int, baseline: int = 1) -> float | None:
    """Throughput ratio of `window` over `baseline` for the first matching (n, delay)."""
    by_key = {(r["n"], r["delay"], r["window"]): r["throughput"] for r in rows}
    for n, delay, w in by_key:
        if w == window and (n, delay, baseline) in by_key and by_key[(n, delay, baseline)] > 0:
            return by_key[(n, delay, window)] / by_key[(n, delay, baseline)]
    return None
