from __future__ import annotations

import pytest

from core.consensus.records import EXECUTE, NEW_VIEW, STATE_TRANSFER, CommitRecord, Transition
from core.simulation.metrics import CSV_COLUMNS, MetricsCollector


def _collector(faulty: frozenset[int] = frozenset()) -> MetricsCollector:
    return MetricsCollector(4, 3, faulty, sample_interval=10.0)


def _executed(collector: MetricsCollector, replica: int, seq: int, name: str = EXECUTE) -> None:
    collector.on_record(Transition(replica=replica, name=name, seq=seq))


def test_decision_needs_nf_replicas():
    collector = _collector()
    _executed(collector, 0, 0)
    _executed(collector, 1, 0)
    assert collector.metrics.decisions == 0
    _executed(collector, 2, 0)
    assert collector.metrics.decisions == 1


def test_state_transfer_counts_as_applied():
    collector = _collector()
    for replica in (0, 1):
        for seq in range(5):
            _executed(collector, replica, seq)
    _executed(collector, 3, 4, name=STATE_TRANSFER)
    assert collector.metrics.decisions == 5


def test_faulty_replicas_do_not_count():
    collector = _collector(frozenset({3}))
    for replica in (0, 3):
        _executed(collector, replica, 0)
    _executed(collector, 3, 1)
    assert collector.metrics.decisions == 0
    _executed(collector, 1, 0)
    assert collector.metrics.decisions == 0
    _executed(collector, 2, 0)
    assert collector.metrics.decisions == 1


def test_view_changes_counted_once_per_view():
    collector = _collector()
    for replica in range(3):
        collector.on_record(Transition(replica=replica, name=NEW_VIEW, view=1))
    collector.on_record(Transition(replica=0, name=NEW_VIEW, view=3))
    assert collector.metrics.view_changes == 2
    assert collector.metrics.max_view == 3


def test_commits_and_latency():
    collector = _collector()
    for latency in (2.0, 4.0):
        collector.on_record(CommitRecord(0, 0, 0, 0, b"\x00" * 32, b"ok", latency))
    collector.on_submit(3)
    metrics = collector.metrics
    assert (metrics.commits, metrics.submitted) == (2, 3)
    assert metrics.mean_latency == pytest.approx(3.0)


def test_samples_and_final_row():
    collector = _collector()
    collector.on_send("ProposeMsg")
    collector.sample_until(25.0)
    metrics = collector.finish(27.5)
    assert [row["time"] for row in metrics.rows] == [10.0, 20.0, 27.5]
    assert all(tuple(row) == CSV_COLUMNS for row in metrics.rows)
    assert metrics.rows[0]["msgs_propose"] == 1


def test_summary_is_json_friendly():
    collector = _collector()
    _executed(collector, 0, 0)
    summary = collector.finish(0.0).summary()
    assert summary["throughput"] == 0.0
    assert summary["messages"] == {}
