"""Per-sequence replica log entries."""

from __future__ import annotations

from dataclasses import dataclass, field

from core.consensus.messages import Batch, CertifyMsg
from core.domain.auth import SignatureShare
from core.domain.types import Digest, ReplicaId, Status
from core.infrastructure.crypto.hashing import proposal_digest


@dataclass(slots=True)
class LogEntry:
    """State of sequence number `seq` as seen by one replica.

    `certify` is present iff status >= VIEW_COMMITTED; `undo` iff EXECUTED.
    `support_shares` is filled only at the primary (TS scheme).
    """

    seq: int
    view: int
    batch: Batch | None = None
    status: Status = Status.PROPOSED
    certify: CertifyMsg | None = None
    support_shares: dict[ReplicaId, SignatureShare] = field(default_factory=dict)
    undo: tuple[tuple[str, str | None], ...] | None = None
    request_keys: tuple[tuple[int, int], ...] = ()
    results: tuple[bytes, ...] | None = None
    certify_sent: bool = False

    @property
    def proposal_digest(self) -> Digest:
        assert self.batch is not None
        return proposal_digest(self.seq, self.view, self.batch.digest)
