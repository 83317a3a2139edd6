"""Run metrics: decisions, client commits, latencies and message counters."""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

from core.consensus.records import EXECUTE, NEW_VIEW, STATE_TRANSFER, CommitRecord, Transition

MESSAGE_COLUMNS = {
    "ProposeMsg": "msgs_propose",
    "SupportMsg": "msgs_support",
    "CertifyMsg": "msgs_certify",
    "InformMsg": "msgs_inform",
    "VcRequestMsg": "msgs_vc",
}
CSV_COLUMNS = ("time", "decisions", "commits", "view", *MESSAGE_COLUMNS.values())


@dataclass(slots=True)
class Metrics:
    decisions: int = 0
    commits: int = 0
    submitted: int = 0
    latencies: list[float] = field(default_factory=list)
    messages: Counter[str] = field(default_factory=Counter)
    view_changes: int = 0
    max_view: int = 0
    virtual_time: float = 0.0
    rows: list[dict[str, Any]] = field(default_factory=list)

    @property
    def throughput(self) -> float:
        return self.decisions / self.virtual_time if self.virtual_time > 0 else 0.0

    @property
    def mean_latency(self) -> float:
        return sum(self.latencies) / len(self.latencies) if self.latencies else 0.0

    def summary(self) -> dict[str, Any]:
        return {
            "decisions": self.decisions,
            "commits": self.commits,
            "submitted": self.submitted,
            "mean_latency": round(self.mean_latency, 6),
            "view_changes": self.view_changes,
            "max_view": self.max_view,
            "virtual_time": self.virtual_time,
            "throughput": round(self.throughput, 9),
            "messages": dict(sorted(self.messages.items())),
        }


class MetricsCollector:
    """Folds trace records into Metrics.

    A sequence number counts as decided once nf non-faulty replicas have
    applied it, by execution or by state transfer.
    """

    def __init__(self, n: int, nf: int, faulty: frozenset[int], sample_interval: float) -> None:
        self.nf = nf
        self.faulty = faulty
        self.metrics = Metrics()
        self._applied = {r: -1 for r in range(n) if r not in faulty}
        self._decided_upto = -1
        self._views_seen: set[int] = set()
        self._interval = sample_interval
        self._next_sample = sample_interval

    def on_send(self, kind: str) -> None:
        self.metrics.messages[kind] += 1

    def on_submit(self, count: int = 1) -> None:
        self.metrics.submitted += count

    def on_record(self, record: Any) -> None:
        if isinstance(record, CommitRecord):
            self.metrics.commits += 1
            self.metrics.latencies.append(record.latency)
        elif isinstance(record, Transition):
            self._on_transition(record)

    def _on_transition(self, t: Transition) -> None:
        if t.replica in self.faulty:
            return
        if t.name in (EXECUTE, STATE_TRANSFER):
            self._applied[t.replica] = max(self._applied.get(t.replica, -1), t.seq)
            if t.seq > self._decided_upto:
                levels = self._applied.values()
                if len(self._applied) >= self.nf:
                    upto = heapq.nlargest(self.nf, levels)[-1]
                    if upto > self._decided_upto:
                        self._decided_upto = upto
                        self.metrics.decisions = upto + 1
        elif t.name == NEW_VIEW:
            if t.view not in self._views_seen:
                self._views_seen.add(t.view)
                self.metrics.view_changes += 1
            self.metrics.max_view = max(self.metrics.max_view, t.view)

    def _row(self, time: float) -> dict[str, Any]:
        m = self.metrics
        row: dict[str, Any] = {
            "time": time,
            "decisions": m.decisions,
            "commits": m.commits,
            "view": m.max_view,
        }
        for kind, column in MESSAGE_COLUMNS.items():
            row[column] = m.messages.get(kind, 0)
        return row

    def sample_until(self, now: float) -> None:
        while self._next_sample <= now:
            self.metrics.rows.append(self._row(self._next_sample))
            self._next_sample += self._interval

    def finish(self, now: float) -> Metrics:
        self.metrics.virtual_time = now
        if not self.metrics.rows or self.metrics.rows[-1]["time"] != now:
            self.metrics.rows.append(self._row(now))
        return self.metrics
