from __future__ import annotations

from pathlib import Path

from core.application.harness.core import check_trace_file
from core.consensus.records import EXECUTE, STATE_TRANSFER
from core.simulation.checker import (
    CHECKPOINT_DIVERGENCE,
    COMMIT_UNIQUENESS,
    COMMITTED_ROLLBACK,
    GAP,
    LEDGER_DIVERGENCE,
    NEW_VIEW_TRUNCATION,
    QUORUM_UNIQUENESS,
    UNBACKED_COMMIT,
    VIOLATION_KINDS,
    check_trace,
)
from core.simulation.trace import write_trace
from tests.fixtures.simulation.traces import (
    CHAIN_A,
    CHAIN_B,
    commit,
    executed_by,
    setup,
    transition,
)


def _only(report, kind: str) -> None:
    counts = report.counts()
    assert counts[kind] >= 1, counts
    assert all(v == 0 for k, v in counts.items() if k != kind), counts


def test_healthy_trace_passes(healthy_trace):
    report = check_trace(healthy_trace)
    assert report.ok
    assert report.commits == 1
    assert set(report.counts()) == set(VIOLATION_KINDS)


def test_conflicting_view_commits_flagged(conflicting_view_commits):
    report = check_trace(conflicting_view_commits)
    _only(report, QUORUM_UNIQUENESS)
    assert report.violations[0].index == 2


def test_rollback_of_committed_entry_flagged(rollback_past_commit):
    _only(check_trace(rollback_past_commit), COMMITTED_ROLLBACK)


def test_new_view_dropping_committed_seq_flagged(truncating_new_view):
    _only(check_trace(truncating_new_view), NEW_VIEW_TRUNCATION)


def test_checkpoint_divergence_flagged(diverging_checkpoints):
    _only(check_trace(diverging_checkpoints), CHECKPOINT_DIVERGENCE)


def test_gap_in_execution_flagged():
    events = [setup(), *executed_by(1.0, (1,), 0, 1)]
    _only(check_trace(events), GAP)


def test_commit_without_backing_flagged():
    events = [setup(), *executed_by(1.0, (1,), 0, 0), commit(2.0, 0, 0)]
    _only(check_trace(events), UNBACKED_COMMIT)


def test_commit_with_different_outcomes_flagged():
    events = [setup(), *executed_by(1.0, (1, 2, 3), 0, 0)]
    events += executed_by(2.0, (1, 2, 3), 0, 1, chain=CHAIN_B)
    events += [commit(3.0, 0, 0), commit(4.0, 0, 1)]
    _only(check_trace(events), COMMIT_UNIQUENESS)


def test_diverging_chains_at_committed_seq_flagged():
    events = [setup(), *executed_by(1.0, (1, 2), 0, 0)]
    events += executed_by(1.0, (3,), 0, 0, chain=CHAIN_B)
    events.append(commit(2.0, 0, 0))
    report = check_trace(events)
    _only(report, LEDGER_DIVERGENCE)
    assert report.violations[0].index == -1


def test_faulty_replicas_are_ignored():
    events = [
        setup(faulty=(2,)),
        *executed_by(1.0, (1, 3), 0, 0),
        transition(1.0, 2, EXECUTE, view=0, seq=7),
        commit(2.0, 0, 0),
    ]
    assert check_trace(events).ok


def test_state_transfer_resets_tracked_chain():
    events = [
        setup(),
        *executed_by(1.0, (1, 2), 0, 0),
        transition(3.0, 3, STATE_TRANSFER, seq=0, aux_digest=CHAIN_A),
        *executed_by(4.0, (1, 2, 3), 0, 1, chain=CHAIN_B),
        commit(5.0, 0, 1),
    ]
    assert check_trace(events).ok


def test_check_trace_file_roundtrip(tmp_path: Path, rollback_past_commit):
    path = write_trace(tmp_path / "trace.txt", rollback_past_commit)
    report = check_trace_file(path)
    _only(report, COMMITTED_ROLLBACK)
    assert report.transitions == 5
