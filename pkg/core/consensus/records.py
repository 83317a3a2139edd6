"""Ground-truth records emitted by state machines into the run trace."""

from __future__ import annotations

from dataclasses import dataclass

from core.domain.types import ClientId, Digest

VIEW_COMMIT = "view_commit"
EXECUTE = "execute"
ROLLBACK = "rollback"
NEW_VIEW = "new_view"
STABLE_CHECKPOINT = "stable_checkpoint"
STATE_TRANSFER = "state_transfer"
VC_REQUEST = "vc_request"
SETUP = "setup"


@dataclass(frozen=True, slots=True)
class Transition:
    """A replica state change.

    Field use per name:
        view_commit: view, seq, digest (batch)
        execute: view, seq, digest (batch), aux_digest (chain hash)
        rollback: seq (new applied seq), aux (previous applied seq)
        new_view: view, seq (k_max)
        vc_request: view (suspected view), seq (last history seq)
        stable_checkpoint: seq, digest (state)
        state_transfer: seq, digest (state), aux_digest (ledger tip)
        setup: replica -1, view (f), aux (n), aux_digest (faulty replica ids)
    """

    replica: int
    name: str
    view: int = 0
    seq: int = -1
    digest: Digest = b""
    aux: int = 0
    aux_digest: bytes = b""


@dataclass(frozen=True, slots=True)
class CommitRecord:
    client: ClientId
    nonce: int
    view: int
    seq: int
    txn_digest: Digest
    result: bytes
    latency: float
