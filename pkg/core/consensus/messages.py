"""Protocol messages and ledger blocks.

All types are immutable values. Canonical bytes and digests live in
`core.consensus.codec`; builders that need them (batches, signed
requests) are provided there too.
"""

from __future__ import annotations

from dataclasses import dataclass

from core.domain.auth import ClientSignature, SignatureShare, ThresholdSignature
from core.domain.types import ClientId, Digest, ReplicaId


@dataclass(frozen=True, slots=True)
class SignedTransaction:
    client: ClientId
    nonce: int
    payload: bytes
    sig: ClientSignature

    @property
    def key(self) -> tuple[ClientId, int]:
        return (self.client, self.nonce)


@dataclass(frozen=True, slots=True)
class Batch:
    requests: tuple[SignedTransaction, ...]
    digest: Digest


@dataclass(frozen=True, slots=True)
class ProposeMsg:
    view: int
    seq: int
    batch: Batch


@dataclass(frozen=True, slots=True)
class SupportMsg:
    view: int
    seq: int
    share: SignatureShare


@dataclass(frozen=True, slots=True)
class CertifyMsg:
    view: int
    seq: int
    ts: ThresholdSignature


# A stored certify message is the transferable proof of a view-commit.
CertifyProof = CertifyMsg


@dataclass(frozen=True, slots=True)
class InformMsg:
    view: int
    seq: int
    txn_digest: Digest
    result: bytes


@dataclass(frozen=True, slots=True)
class HistoryEntry:
    certify: CertifyMsg
    batch: Batch

    @property
    def seq(self) -> int:
        return self.certify.seq


@dataclass(frozen=True, slots=True)
class CheckpointMsg:
    seq: int
    state_digest: Digest
    ledger_digest: Digest
    signer: ReplicaId
    sig: SignatureShare


@dataclass(frozen=True, slots=True)
class CheckpointCertificate:
    """nf matching checkpoint messages from distinct signers."""

    seq: int
    state_digest: Digest
    ledger_digest: Digest
    votes: tuple[CheckpointMsg, ...]

    @property
    def signers(self) -> tuple[ReplicaId, ...]:
        return tuple(v.signer for v in self.votes)


@dataclass(frozen=True, slots=True)
class VcRequestMsg:
    """Request to replace the primary of `view`.

    `history` lists executed entries consecutively from the checkpoint
    (or from seq 0 when `checkpoint` is None).
    """

    view: int
    history: tuple[HistoryEntry, ...]
    checkpoint: CheckpointCertificate | None
    signer: ReplicaId
    sig: SignatureShare

    @property
    def base_seq(self) -> int:
        return self.checkpoint.seq if self.checkpoint is not None else -1

    @property
    def last_seq(self) -> int:
        return self.base_seq + len(self.history)


@dataclass(frozen=True, slots=True)
class NvProposeMsg:
    new_view: int
    proofs: tuple[VcRequestMsg, ...]


@dataclass(frozen=True, slots=True)
class ExecutedRequest:
    """Row of the executed-request table (dedup and cached informs)."""

    client: ClientId
    nonce: int
    view: int
    seq: int
    txn_digest: Digest
    result: bytes


@dataclass(frozen=True, slots=True)
class StateSnapshot:
    seq: int
    kv: tuple[tuple[str, str], ...]
    executed: tuple[ExecutedRequest, ...]


@dataclass(frozen=True, slots=True)
class Block:
    seq: int
    view: int
    digest: Digest
    prev_hash: Digest
    proof: CertifyMsg


@dataclass(frozen=True, slots=True)
class StateRequestMsg:
    seq: int


@dataclass(frozen=True, slots=True)
class StateReplyMsg:
    snapshot: StateSnapshot
    blocks: tuple[Block, ...]
    certificate: CheckpointCertificate


Message = (
    SignedTransaction
    | ProposeMsg
    | SupportMsg
    | CertifyMsg
    | InformMsg
    | VcRequestMsg
    | NvProposeMsg
    | CheckpointMsg
    | StateRequestMsg
    | StateReplyMsg
)


@dataclass(frozen=True, slots=True)
class Send:
    """Output of a state machine: deliver `msg` to `dest` (an address or BROADCAST)."""

    dest: str
    msg: Message
