"""Canonical binary encoding of protocol messages and trace records.

Every top-level value is a one-byte tag followed by its fields in fixed
order; integers are fixed-width big-endian, byte strings and sequences are
length-prefixed. Nested values are written without a tag. The encoding is
injective and deterministic, so digests over it are stable.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from typing import Any

from core.consensus.messages import (
    Batch,
    Block,
    CertifyMsg,
    CheckpointCertificate,
    CheckpointMsg,
    ExecutedRequest,
    HistoryEntry,
    InformMsg,
    NvProposeMsg,
    ProposeMsg,
    SignedTransaction,
    StateReplyMsg,
    StateRequestMsg,
    StateSnapshot,
    SupportMsg,
    VcRequestMsg,
)
from core.consensus.records import CommitRecord, Transition
from core.consensus.wire import Reader, Writer
from core.domain.auth import ClientSignature, SignatureShare, ThresholdSignature
from core.domain.errors import MalformedMessage
from core.domain.interfaces import Authenticator
from core.domain.types import ClientId, Digest
from core.infrastructure.crypto.hashing import hash_bytes

# === Nested values ===


def _write_share(w: Writer, share: SignatureShare) -> None:
    w.i64(share.signer).blob(share.digest).blob(share.tag)


def _read_share(r: Reader) -> SignatureShare:
    return SignatureShare(signer=r.i64(), digest=r.blob(), tag=r.blob())


def _write_ts(w: Writer, ts: ThresholdSignature) -> None:
    w.blob(ts.digest).u32(len(ts.contributors))
    for signer in ts.contributors:
        w.i64(signer)
    w.blob(ts.tag)


def _read_ts(r: Reader) -> ThresholdSignature:
    digest = r.blob()
    contributors = tuple(r.i64() for _ in range(r.count()))
    return ThresholdSignature(digest=digest, contributors=contributors, tag=r.blob())


def _write_txn(w: Writer, txn: SignedTransaction) -> None:
    w.i64(txn.client).i64(txn.nonce).blob(txn.payload)
    w.i64(txn.sig.client).blob(txn.sig.payload_digest).blob(txn.sig.tag)


def _read_txn(r: Reader) -> SignedTransaction:
    client, nonce, payload = r.i64(), r.i64(), r.blob()
    sig = ClientSignature(client=r.i64(), payload_digest=r.blob(), tag=r.blob())
    return SignedTransaction(client=client, nonce=nonce, payload=payload, sig=sig)


def _write_batch(w: Writer, batch: Batch) -> None:
    w.u32(len(batch.requests))
    for txn in batch.requests:
        _write_txn(w, txn)
    w.blob(batch.digest)


def _read_batch(r: Reader) -> Batch:
    requests = tuple(_read_txn(r) for _ in range(r.count()))
    return Batch(requests=requests, digest=r.blob())


def _write_certify(w: Writer, m: CertifyMsg) -> None:
    w.i64(m.view).i64(m.seq)
    _write_ts(w, m.ts)


def _read_certify(r: Reader) -> CertifyMsg:
    view, seq = r.i64(), r.i64()
    return CertifyMsg(view=view, seq=seq, ts=_read_ts(r))


def _write_checkpoint(w: Writer, m: CheckpointMsg) -> None:
    w.i64(m.seq).blob(m.state_digest).blob(m.ledger_digest).i64(m.signer)
    _write_share(w, m.sig)


def _read_checkpoint(r: Reader) -> CheckpointMsg:
    seq, state_digest, ledger_digest, signer = r.i64(), r.blob(), r.blob(), r.i64()
    return CheckpointMsg(
        seq=seq,
        state_digest=state_digest,
        ledger_digest=ledger_digest,
        signer=signer,
        sig=_read_share(r),
    )


def _write_certificate(w: Writer, cert: CheckpointCertificate) -> None:
    w.i64(cert.seq).blob(cert.state_digest).blob(cert.ledger_digest)
    w.u32(len(cert.votes))
    for vote in cert.votes:
        _write_checkpoint(w, vote)


def _read_certificate(r: Reader) -> CheckpointCertificate:
    seq, state_digest, ledger_digest = r.i64(), r.blob(), r.blob()
    votes = tuple(_read_checkpoint(r) for _ in range(r.count()))
    return CheckpointCertificate(seq, state_digest, ledger_digest, votes)


def _write_vc_body(
    w: Writer,
    view: int,
    history: Sequence[HistoryEntry],
    checkpoint: CheckpointCertificate | None,
    signer: int,
) -> None:
    w.i64(view).u32(len(history))
    for entry in history:
        _write_certify(w, entry.certify)
        _write_batch(w, entry.batch)
    if checkpoint is None:
        w.u8(0)
    else:
        w.u8(1)
        _write_certificate(w, checkpoint)
    w.i64(signer)


def _write_vc(w: Writer, m: VcRequestMsg) -> None:
    _write_vc_body(w, m.view, m.history, m.checkpoint, m.signer)
    _write_share(w, m.sig)


def _read_vc(r: Reader) -> VcRequestMsg:
    view = r.i64()
    history = tuple(
        HistoryEntry(certify=_read_certify(r), batch=_read_batch(r))
        for _ in range(r.count())
    )
    flag = r.u8()
    if flag not in (0, 1):
        raise MalformedMessage(f"invalid optional flag {flag}")
    checkpoint = _read_certificate(r) if flag else None
    signer = r.i64()
    return VcRequestMsg(view, history, checkpoint, signer, _read_share(r))


def _write_block(w: Writer, block: Block) -> None:
    w.i64(block.seq).i64(block.view).blob(block.digest).blob(block.prev_hash)
    _write_certify(w, block.proof)


def _read_block(r: Reader) -> Block:
    seq, view, digest, prev_hash = r.i64(), r.i64(), r.blob(), r.blob()
    return Block(seq=seq, view=view, digest=digest, prev_hash=prev_hash, proof=_read_certify(r))


def _write_executed(w: Writer, row: ExecutedRequest) -> None:
    w.i64(row.client).i64(row.nonce).i64(row.view).i64(row.seq)
    w.blob(row.txn_digest).blob(row.result)


def _read_executed(r: Reader) -> ExecutedRequest:
    return ExecutedRequest(
        client=r.i64(),
        nonce=r.i64(),
        view=r.i64(),
        seq=r.i64(),
        txn_digest=r.blob(),
        result=r.blob(),
    )


def _write_snapshot(w: Writer, snap: StateSnapshot) -> None:
    w.i64(snap.seq).u32(len(snap.kv))
    for key, value in snap.kv:
        w.text(key).text(value)
    w.u32(len(snap.executed))
    for row in snap.executed:
        _write_executed(w, row)


def _read_snapshot(r: Reader) -> StateSnapshot:
    seq = r.i64()
    kv = tuple((r.text(), r.text()) for _ in range(r.count()))
    executed = tuple(_read_executed(r) for _ in range(r.count()))
    return StateSnapshot(seq=seq, kv=kv, executed=executed)


# === Top-level values ===


def _w_propose(w: Writer, m: ProposeMsg) -> None:
    w.i64(m.view).i64(m.seq)
    _write_batch(w, m.batch)


def _r_propose(r: Reader) -> ProposeMsg:
    view, seq = r.i64(), r.i64()
    return ProposeMsg(view=view, seq=seq, batch=_read_batch(r))


def _w_support(w: Writer, m: SupportMsg) -> None:
    w.i64(m.view).i64(m.seq)
    _write_share(w, m.share)


def _r_support(r: Reader) -> SupportMsg:
    view, seq = r.i64(), r.i64()
    return SupportMsg(view=view, seq=seq, share=_read_share(r))


def _w_inform(w: Writer, m: InformMsg) -> None:
    w.i64(m.view).i64(m.seq).blob(m.txn_digest).blob(m.result)


def _r_inform(r: Reader) -> InformMsg:
    return InformMsg(view=r.i64(), seq=r.i64(), txn_digest=r.blob(), result=r.blob())


def _w_nv(w: Writer, m: NvProposeMsg) -> None:
    w.i64(m.new_view).u32(len(m.proofs))
    for proof in m.proofs:
        _write_vc(w, proof)


def _r_nv(r: Reader) -> NvProposeMsg:
    new_view = r.i64()
    return NvProposeMsg(new_view=new_view, proofs=tuple(_read_vc(r) for _ in range(r.count())))


def _w_state_request(w: Writer, m: StateRequestMsg) -> None:
    w.i64(m.seq)


def _r_state_request(r: Reader) -> StateRequestMsg:
    return StateRequestMsg(seq=r.i64())


def _w_state_reply(w: Writer, m: StateReplyMsg) -> None:
    _write_snapshot(w, m.snapshot)
    w.u32(len(m.blocks))
    for block in m.blocks:
        _write_block(w, block)
    _write_certificate(w, m.certificate)


def _r_state_reply(r: Reader) -> StateReplyMsg:
    snapshot = _read_snapshot(r)
    blocks = tuple(_read_block(r) for _ in range(r.count()))
    return StateReplyMsg(snapshot=snapshot, blocks=blocks, certificate=_read_certificate(r))


def _w_transition(w: Writer, t: Transition) -> None:
    w.i64(t.replica).text(t.name).i64(t.view).i64(t.seq)
    w.blob(t.digest).i64(t.aux).blob(t.aux_digest)


def _r_transition(r: Reader) -> Transition:
    return Transition(
        replica=r.i64(),
        name=r.text(),
        view=r.i64(),
        seq=r.i64(),
        digest=r.blob(),
        aux=r.i64(),
        aux_digest=r.blob(),
    )


def _w_commit(w: Writer, c: CommitRecord) -> None:
    w.i64(c.client).i64(c.nonce).i64(c.view).i64(c.seq)
    w.blob(c.txn_digest).blob(c.result).f64(c.latency)


def _r_commit(r: Reader) -> CommitRecord:
    return CommitRecord(
        client=r.i64(),
        nonce=r.i64(),
        view=r.i64(),
        seq=r.i64(),
        txn_digest=r.blob(),
        result=r.blob(),
        latency=r.f64(),
    )


_Codec = tuple[int, Callable[[Writer, Any], None], Callable[[Reader], Any]]

_REGISTRY: dict[type, _Codec] = {
    SignedTransaction: (1, _write_txn, _read_txn),
    ProposeMsg: (2, _w_propose, _r_propose),
    SupportMsg: (3, _w_support, _r_support),
    CertifyMsg: (4, _write_certify, _read_certify),
    InformMsg: (5, _w_inform, _r_inform),
    VcRequestMsg: (6, _write_vc, _read_vc),
    NvProposeMsg: (7, _w_nv, _r_nv),
    CheckpointMsg: (8, _write_checkpoint, _read_checkpoint),
    StateRequestMsg: (9, _w_state_request, _r_state_request),
    StateReplyMsg: (10, _w_state_reply, _r_state_reply),
    Block: (11, _write_block, _read_block),
    Batch: (12, _write_batch, _read_batch),
    Transition: (13, _w_transition, _r_transition),
    CommitRecord: (14, _w_commit, _r_commit),
}
_BY_TAG = {tag: reader for tag, _, reader in _REGISTRY.values()}
_NAMES = {cls: cls.__name__ for cls in _REGISTRY}


def encode(msg: Any) -> bytes:
    """Canonical bytes of `msg` (tag byte + fields)."""
    try:
        tag, writer, _ = _REGISTRY[type(msg)]
    except KeyError:
        raise TypeError(f"cannot encode {type(msg).__name__}") from None
    w = Writer().u8(tag)
    writer(w, msg)
    return w.getvalue()


def decode(data: bytes) -> Any:
    """Inverse of `encode`.

    Raises:
        MalformedMessage: truncated input, unknown tag or trailing bytes.
    """
    r = Reader(bytes(data))
    tag = r.u8()
    reader = _BY_TAG.get(tag)
    if reader is None:
        raise MalformedMessage(f"unknown message tag {tag}")
    msg = reader(r)
    r.finish()
    return msg


def message_kind(msg: Any) -> str:
    return _NAMES.get(type(msg), type(msg).__name__)


# === Digests and builders ===


def transaction_digest(client: ClientId, nonce: int, payload: bytes) -> Digest:
    """Digest a client signs: binds (client, nonce, payload)."""
    return hash_bytes(Writer().i64(client).i64(nonce).blob(payload).getvalue())


def request_digest(txn: SignedTransaction) -> Digest:
    return transaction_digest(txn.client, txn.nonce, txn.payload)


def sign_transaction(
    auth: Authenticator, client: ClientId, nonce: int, payload: bytes
) -> SignedTransaction:
    sig = auth.sign_client(client, transaction_digest(client, nonce, payload))
    return SignedTransaction(client=client, nonce=nonce, payload=payload, sig=sig)


def verify_transaction(auth: Authenticator, txn: SignedTransaction) -> bool:
    digest = request_digest(txn)
    if txn.sig.client != txn.client or txn.sig.payload_digest != digest:
        return False
    return auth.verify_client(txn.sig, digest)


def batch_digest(requests: Iterable[SignedTransaction]) -> Digest:
    w = Writer()
    for txn in requests:
        _write_txn(w, txn)
    return hash_bytes(w.getvalue())


def make_batch(requests: Iterable[SignedTransaction]) -> Batch:
    requests = tuple(requests)
    if not requests:
        raise ValueError("a batch holds at least one request")
    return Batch(requests=requests, digest=batch_digest(requests))


def vc_signing_digest(
    view: int,
    history: Sequence[HistoryEntry],
    checkpoint: CheckpointCertificate | None,
    signer: int,
) -> Digest:
    w = Writer()
    _write_vc_body(w, view, history, checkpoint, signer)
    return hash_bytes(w.getvalue())


def checkpoint_signing_digest(seq: int, state_digest: Digest, ledger_digest: Digest) -> Digest:
    return hash_bytes(Writer().i64(seq).blob(state_digest).blob(ledger_digest).getvalue())


def block_header_hash(block: Block) -> Digest:
    """Chain hash of a block; covers {k, d, v, prev_hash} only."""
    w = Writer().i64(block.seq).blob(block.digest).i64(block.view).blob(block.prev_hash)
    return hash_bytes(w.getvalue())


def snapshot_digest(snapshot: StateSnapshot) -> Digest:
    w = Writer()
    _write_snapshot(w, snapshot)
    return hash_bytes(w.getvalue())
