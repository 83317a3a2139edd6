"""Checkpoint certificates and state-transfer verification.

A checkpoint at seq k is stable once nf distinct replicas sign the same
(k, state_digest, ledger_digest) triple. The certificate doubles as the
trust anchor for state transfer: a snapshot and chain are installed only
if they hash to the certified digests.
"""

from __future__ import annotations

from collections import defaultdict

from core.consensus.codec import block_header_hash, checkpoint_signing_digest, snapshot_digest
from core.consensus.messages import CheckpointCertificate, CheckpointMsg, StateReplyMsg
from core.consensus.ledger import chain_valid
from core.domain.interfaces import Authenticator
from core.domain.types import Digest, ReplicaId

Triple = tuple[int, Digest, Digest]


def make_checkpoint(
    auth: Authenticator, signer: ReplicaId, seq: int, state_digest: Digest, ledger_digest: Digest
) -> CheckpointMsg:
    sig = auth.sign_share(signer, checkpoint_signing_digest(seq, state_digest, ledger_digest))
    return CheckpointMsg(seq, state_digest, ledger_digest, signer, sig)


def checkpoint_vote_valid(auth: Authenticator, m: CheckpointMsg, interval: int) -> bool:
    if m.seq <= 0 or m.seq % interval != 0:
        return False
    if m.sig.signer != m.signer:
        return False
    if m.sig.digest != checkpoint_signing_digest(m.seq, m.state_digest, m.ledger_digest):
        return False
    return auth.verify_share(m.sig)


def certificate_valid(
    auth: Authenticator, cert: CheckpointCertificate, nf: int, interval: int
) -> bool:
    signers = cert.signers
    if len(signers) < nf or len(set(signers)) != len(signers):
        return False
    for vote in cert.votes:
        if (vote.seq, vote.state_digest, vote.ledger_digest) != (
            cert.seq,
            cert.state_digest,
            cert.ledger_digest,
        ):
            return False
        if not checkpoint_vote_valid(auth, vote, interval):
            return False
    return True


def state_reply_valid(auth: Authenticator, reply: StateReplyMsg, genesis: Digest) -> bool:
    """Snapshot and chain match the certificate they claim."""
    cert = reply.certificate
    snapshot = reply.snapshot
    if snapshot.seq != cert.seq or snapshot_digest(snapshot) != cert.state_digest:
        return False
    blocks = reply.blocks
    if len(blocks) != cert.seq + 1:
        return False
    tip = block_header_hash(blocks[-1]) if blocks else genesis
    if tip != cert.ledger_digest:
        return False
    return chain_valid(auth, blocks, genesis)


class CheckpointTracker:
    """Collects checkpoint votes until some triple reaches nf signers.

    Each signer has one current vote per seq; a later vote with another
    triple replaces it (a replica re-votes after re-executing the entry).
    """

    def __init__(self, nf: int) -> None:
        self.nf = nf
        self._votes: dict[int, dict[ReplicaId, CheckpointMsg]] = defaultdict(dict)
        self._certified: set[int] = set()

    def add(self, m: CheckpointMsg) -> CheckpointCertificate | None:
        if m.seq in self._certified:
            return None
        votes = self._votes[m.seq]
        triple = (m.seq, m.state_digest, m.ledger_digest)
        held = votes.get(m.signer)
        if held is not None and (held.seq, held.state_digest, held.ledger_digest) == triple:
            return None
        votes[m.signer] = m
        matching = sorted(
            (v for v in votes.values() if (v.seq, v.state_digest, v.ledger_digest) == triple),
            key=lambda v: v.signer,
        )
        if len(matching) < self.nf:
            return None
        self._certified.add(m.seq)
        return CheckpointCertificate(
            m.seq, m.state_digest, m.ledger_digest, tuple(matching[: self.nf])
        )

    def collect_garbage(self, stable_seq: int) -> None:
        for seq in [s for s in self._votes if s <= stable_seq]:
            del self._votes[seq]
        self._certified = {s for s in self._certified if s > stable_seq}
