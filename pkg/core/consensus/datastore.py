"""Key-value execution target with per-entry undo.

Commands are ASCII `put <key> <value>` / `get <key>`; anything after a NUL
byte is padding. The executed-request table is part of the replicated
state: it deduplicates requests across sequence numbers, caches informs
for retransmissions, and is covered by the state digest.
"""

from __future__ import annotations

from dataclasses import dataclass

from core.consensus.codec import request_digest, snapshot_digest
from core.consensus.messages import (
    Batch,
    ExecutedRequest,
    InformMsg,
    SignedTransaction,
    StateSnapshot,
)
from core.domain.errors import OutOfOrderExecution
from core.domain.types import ClientId, Digest

RESULT_OK = b"ok"
RESULT_INVALID = b"invalid"

RequestKey = tuple[ClientId, int]
UndoPair = tuple[str, str | None]


@dataclass(frozen=True, slots=True)
class Execution:
    """Outcome of executing one batch at one sequence number."""

    informs: tuple[tuple[SignedTransaction, InformMsg], ...]
    undo: tuple[UndoPair, ...]
    request_keys: tuple[RequestKey, ...]
    results: tuple[bytes, ...]


def parse_command(payload: bytes) -> tuple[str, ...]:
    text = payload.split(b"\x00", 1)[0].decode("ascii", errors="replace")
    return tuple(text.split(" ", 2))


class Datastore:
    def __init__(self) -> None:
        self.kv: dict[str, str] = {}
        self.executed: dict[RequestKey, ExecutedRequest] = {}
        self.applied_seq = -1

    def lookup(self, client: ClientId, nonce: int) -> ExecutedRequest | None:
        return self.executed.get((client, nonce))

    def _apply(self, payload: bytes, undo: list[UndoPair]) -> bytes:
        parts = parse_command(payload)
        if len(parts) == 3 and parts[0] == "put":
            _, key, value = parts
            undo.append((key, self.kv.get(key)))
            self.kv[key] = value
            return RESULT_OK
        if len(parts) == 2 and parts[0] == "get":
            return self.kv.get(parts[1], "").encode("ascii", errors="replace")
        return RESULT_INVALID

    def execute(self, view: int, seq: int, batch: Batch) -> Execution:
        """Apply `batch` as entry `seq`; requests already executed are skipped."""
        if seq != self.applied_seq + 1:
            raise OutOfOrderExecution(
                f"execute({seq}) out of order, applied_seq={self.applied_seq}"
            )
        undo: list[UndoPair] = []
        keys: list[RequestKey] = []
        informs: list[tuple[SignedTransaction, InformMsg]] = []
        results: list[bytes] = []
        for txn in batch.requests:
            if txn.key in self.executed:
                continue
            result = self._apply(txn.payload, undo)
            digest: Digest = request_digest(txn)
            self.executed[txn.key] = ExecutedRequest(
                client=txn.client,
                nonce=txn.nonce,
                view=view,
                seq=seq,
                txn_digest=digest,
                result=result,
            )
            keys.append(txn.key)
            results.append(result)
            informs.append((txn, InformMsg(view=view, seq=seq, txn_digest=digest, result=result)))
        self.applied_seq = seq
        return Execution(tuple(informs), tuple(undo), tuple(keys), tuple(results))

    def revert(
        self, seq: int, undo: tuple[UndoPair, ...], request_keys: tuple[RequestKey, ...]
    ) -> None:
        """Undo the latest executed entry."""
        if seq != self.applied_seq:
            raise OutOfOrderExecution(
                f"revert({seq}) is not the latest entry ({self.applied_seq})"
            )
        for key, prior in reversed(undo):
            if prior is None:
                self.kv.pop(key, None)
            else:
                self.kv[key] = prior
        for key in request_keys:
            self.executed.pop(key, None)
        self.applied_seq = seq - 1

    def snapshot(self) -> StateSnapshot:
        return StateSnapshot(
            seq=self.applied_seq,
            kv=tuple(sorted(self.kv.items())),
            executed=tuple(self.executed[k] for k in sorted(self.executed)),
        )

    def state_digest(self) -> Digest:
        return snapshot_digest(self.snapshot())

    def install(self, snapshot: StateSnapshot) -> None:
        self.kv = dict(snapshot.kv)
        self.executed = {(row.client, row.nonce): row for row in snapshot.executed}
        self.applied_seq = snapshot.seq


def replay(batches: list[Batch]) -> Datastore:
    """Fresh datastore with `batches` executed as entries 0..len-1 in view 0."""
    store = Datastore()
    for seq, batch in enumerate(batches):
        store.execute(0, seq, batch)
    return store
