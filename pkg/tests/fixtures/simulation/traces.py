"""Hand-built ground-truth traces for the safety checker."""

from __future__ import annotations

import pytest

from core.consensus.records import (
    EXECUTE,
    NEW_VIEW,
    ROLLBACK,
    SETUP,
    STABLE_CHECKPOINT,
    VIEW_COMMIT,
    CommitRecord,
    Transition,
)
from core.infrastructure.crypto import hash_bytes
from core.simulation.trace import EventKind, TraceEvent

D_A = hash_bytes(b"batch-a")
D_B = hash_bytes(b"batch-b")
CHAIN_A = hash_bytes(b"chain-a")
CHAIN_B = hash_bytes(b"chain-b")


def setup(n: int = 4, f: int = 1, faulty: tuple[int, ...] = ()) -> TraceEvent:
    t = Transition(replica=-1, name=SETUP, view=f, aux=n, aux_digest=bytes(faulty))
    return TraceEvent(0.0, EventKind.STATE_TRANSITION, "r0", payload=t)


def transition(time: float, replica: int, name: str, **fields) -> TraceEvent:
    t = Transition(replica=replica, name=name, **fields)
    return TraceEvent(time, EventKind.STATE_TRANSITION, f"r{replica}", payload=t)


def commit(time: float, view: int, seq: int, client: int = 0, nonce: int = 0, result=b"ok"):
    c = CommitRecord(
        client=client,
        nonce=nonce,
        view=view,
        seq=seq,
        txn_digest=hash_bytes(b"txn%d.%d" % (client, nonce)),
        result=result,
        latency=1.0,
    )
    return TraceEvent(time, EventKind.CLIENT_COMMIT, f"c{client}", payload=c)


def executed_by(time: float, replicas, view: int, seq: int, digest=D_A, chain=CHAIN_A):
    return [
        transition(time, r, EXECUTE, view=view, seq=seq, digest=digest, aux_digest=chain)
        for r in replicas
    ]


@pytest.fixture()
def healthy_trace() -> list[TraceEvent]:
    events = [setup()]
    events += [transition(1.0, r, VIEW_COMMIT, view=0, seq=0, digest=D_A) for r in (1, 2, 3)]
    events += executed_by(1.0, (1, 2, 3), 0, 0)
    events.append(commit(2.0, 0, 0))
    return events


@pytest.fixture()
def conflicting_view_commits() -> list[TraceEvent]:
    return [
        setup(),
        transition(1.0, 1, VIEW_COMMIT, view=0, seq=0, digest=D_A),
        transition(1.0, 2, VIEW_COMMIT, view=0, seq=0, digest=D_B),
    ]


@pytest.fixture()
def rollback_past_commit() -> list[TraceEvent]:
    events = [setup()]
    events += executed_by(1.0, (1, 2, 3), 0, 0)
    events.append(commit(2.0, 0, 0))
    events.append(transition(3.0, 1, ROLLBACK, view=1, seq=-1, aux=0))
    return events


@pytest.fixture()
def truncating_new_view() -> list[TraceEvent]:
    events = [setup()]
    for seq in range(3):
        events += executed_by(1.0 + seq, (1, 2, 3), 0, seq, chain=hash_bytes(b"%d" % seq))
    events.append(commit(5.0, 0, 2))
    events.append(transition(6.0, 2, NEW_VIEW, view=1, seq=1))
    return events


@pytest.fixture()
def diverging_checkpoints() -> list[TraceEvent]:
    return [
        setup(),
        transition(1.0, 1, STABLE_CHECKPOINT, seq=100, digest=D_A),
        transition(1.0, 2, STABLE_CHECKPOINT, seq=100, digest=D_B),
    ]
