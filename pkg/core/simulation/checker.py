"""Safety checks over the ground-truth records of a trace.

Only STATE_TRANSITION and CLIENT_COMMIT events are read; message events are
ignored, so traces recorded without message logging check the same way.
Replicas named in the setup record as faulty are excluded from every check.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field

from core.consensus.records import (
    EXECUTE,
    NEW_VIEW,
    ROLLBACK,
    SETUP,
    STABLE_CHECKPOINT,
    STATE_TRANSFER,
    VIEW_COMMIT,
    CommitRecord,
    Transition,
)
from core.simulation.trace import EventKind, TraceEvent

QUORUM_UNIQUENESS = "quorum_uniqueness"
COMMITTED_ROLLBACK = "committed_rollback"
NEW_VIEW_TRUNCATION = "new_view_truncation"
GAP = "gap"
LEDGER_DIVERGENCE = "ledger_divergence"
COMMIT_UNIQUENESS = "commit_uniqueness"
UNBACKED_COMMIT = "unbacked_commit"
CHECKPOINT_DIVERGENCE = "checkpoint_divergence"

VIOLATION_KINDS = (
    QUORUM_UNIQUENESS,
    COMMITTED_ROLLBACK,
    NEW_VIEW_TRUNCATION,
    GAP,
    LEDGER_DIVERGENCE,
    COMMIT_UNIQUENESS,
    UNBACKED_COMMIT,
    CHECKPOINT_DIVERGENCE,
)


@dataclass(frozen=True, slots=True)
class Violation:
    kind: str
    index: int
    detail: str


@dataclass(slots=True)
class ViolationReport:
    violations: list[Violation] = field(default_factory=list)
    transitions: int = 0
    commits: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def counts(self) -> dict[str, int]:
        tally = Counter(v.kind for v in self.violations)
        return {kind: tally.get(kind, 0) for kind in VIOLATION_KINDS}

    def add(self, kind: str, index: int, detail: str) -> None:
        self.violations.append(Violation(kind, index, detail))


@dataclass(slots=True)
class _ReplicaView:
    last: int = -1
    # seq -> (view, batch digest) of currently executed entries
    executed: dict[int, tuple[int, bytes]] = field(default_factory=dict)
    # seq -> chain hash after executing (or installing) seq
    chain: dict[int, bytes] = field(default_factory=dict)


class TraceChecker:
    def __init__(self) -> None:
        self.report = ViolationReport()
        self.faulty: frozenset[int] = frozenset()
        self.n: int | None = None
        self.f = 0
        self._replicas: dict[int, _ReplicaView] = defaultdict(_ReplicaView)
        self._view_commits: dict[tuple[int, int], tuple[bytes, int, int]] = {}
        self._ever_executed: dict[tuple[int, int], set[int]] = defaultdict(set)
        self._commits: dict[tuple[int, int], CommitRecord] = {}
        # seq -> view of a client commit at that seq
        self._committed_seqs: dict[int, int] = {}
        self._new_views: list[tuple[int, Transition]] = []
        self._checkpoints: dict[int, tuple[bytes, int]] = {}

    def feed(self, index: int, event: TraceEvent) -> None:
        payload = event.payload
        if event.kind is EventKind.STATE_TRANSITION and isinstance(payload, Transition):
            self.report.transitions += 1
            self._on_transition(index, payload)
        elif event.kind is EventKind.CLIENT_COMMIT and isinstance(payload, CommitRecord):
            self.report.commits += 1
            self._on_commit(index, payload)

    def finish(self) -> ViolationReport:
        self._check_new_views()
        self._check_ledgers()
        self.report.violations.sort(key=lambda v: (v.index, v.kind))
        return self.report

    # === Transitions ===

    def _on_transition(self, index: int, t: Transition) -> None:
        if t.name == SETUP:
            self.n = t.aux
            self.f = t.view
            self.faulty = frozenset(t.aux_digest)
            return
        if t.replica in self.faulty:
            return
        state = self._replicas[t.replica]
        if t.name == VIEW_COMMIT:
            self._on_view_commit(index, t)
        elif t.name == EXECUTE:
            if t.seq != state.last + 1:
                self.report.add(
                    GAP, index, f"replica {t.replica} executed {t.seq} after {state.last}"
                )
            state.last = t.seq
            state.executed[t.seq] = (t.view, t.digest)
            state.chain[t.seq] = t.aux_digest
            self._ever_executed[(t.view, t.seq)].add(t.replica)
        elif t.name == ROLLBACK:
            self._on_rollback(index, t, state)
        elif t.name == STATE_TRANSFER:
            state.last = t.seq
            state.executed.clear()
            state.chain = {t.seq: t.aux_digest}
        elif t.name == NEW_VIEW:
            self._new_views.append((index, t))
        elif t.name == STABLE_CHECKPOINT:
            seen = self._checkpoints.setdefault(t.seq, (t.digest, t.replica))
            if seen[0] != t.digest:
                self.report.add(
                    CHECKPOINT_DIVERGENCE,
                    index,
                    f"stable checkpoint {t.seq}: replica {t.replica} disagrees with replica {seen[1]}",
                )

    def _on_view_commit(self, index: int, t: Transition) -> None:
        key = (t.view, t.seq)
        seen = self._view_commits.get(key)
        if seen is None:
            self._view_commits[key] = (t.digest, t.replica, index)
        elif seen[0] != t.digest:
            self.report.add(
                QUORUM_UNIQUENESS,
                index,
                f"(view={t.view}, seq={t.seq}): replica {t.replica} view-committed "
                f"{t.digest.hex()[:16]} but replica {seen[1]} committed {seen[0].hex()[:16]}",
            )

    def _on_rollback(self, index: int, t: Transition, state: _ReplicaView) -> None:
        for seq in range(t.seq + 1, state.last + 1):
            entry = state.executed.pop(seq, None)
            state.chain.pop(seq, None)
            committed_view = self._committed_seqs.get(seq)
            if entry is not None and committed_view is not None and entry[0] == committed_view:
                self.report.add(
                    COMMITTED_ROLLBACK,
                    index,
                    f"replica {t.replica} rolled back client-committed (view={entry[0]}, seq={seq})",
                )
        state.last = t.seq

    # === Client commits ===

    def _on_commit(self, index: int, c: CommitRecord) -> None:
        key = (c.client, c.nonce)
        previous = self._commits.get(key)
        if previous is not None:
            if (previous.view, previous.seq, previous.result) != (c.view, c.seq, c.result):
                self.report.add(
                    COMMIT_UNIQUENESS,
                    index,
                    f"client {c.client} nonce {c.nonce} committed twice with different outcomes",
                )
            return
        self._commits[key] = c
        self._committed_seqs.setdefault(c.seq, c.view)
        if self.n is not None:
            backing = len(self._ever_executed.get((c.view, c.seq), ()))
            needed = self.n - 2 * self.f
            if backing < needed:
                self.report.add(
                    UNBACKED_COMMIT,
                    index,
                    f"client {c.client} nonce {c.nonce} committed at (view={c.view}, seq={c.seq}) "
                    f"with {backing} non-faulty executions, expected >= {needed}",
                )

    # === End of trace ===

    def _check_new_views(self) -> None:
        for index, t in self._new_views:
            for commit in self._commits.values():
                if commit.view < t.view and commit.seq > t.seq:
                    self.report.add(
                        NEW_VIEW_TRUNCATION,
                        index,
                        f"replica {t.replica} adopted view {t.view} with k_max={t.seq}, "
                        f"dropping committed seq {commit.seq} of view {commit.view}",
                    )

    def _check_ledgers(self) -> None:
        for seq in sorted(self._committed_seqs):
            hashes: dict[bytes, int] = {}
            for replica, state in sorted(self._replicas.items()):
                value = state.chain.get(seq)
                if value is not None:
                    hashes.setdefault(value, replica)
            if len(hashes) > 1:
                owners = ", ".join(f"replica {r}" for r in sorted(hashes.values()))
                self.report.add(
                    LEDGER_DIVERGENCE, -1, f"chain hash at committed seq {seq} differs ({owners})"
                )


def check_trace(events: Iterable[TraceEvent]) -> ViolationReport:
    """Check a complete trace; an empty violation list means the run is safe."""
    checker = TraceChecker()
    for index, event in enumerate(events):
        checker.feed(index, event)
    return checker.finish()
