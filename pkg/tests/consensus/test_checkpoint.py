from __future__ import annotations

from dataclasses import replace

from core.consensus.checkpoint import (
    CheckpointTracker,
    certificate_valid,
    checkpoint_vote_valid,
    make_checkpoint,
    state_reply_valid,
)
from core.consensus.messages import StateReplyMsg
from core.infrastructure.crypto import hash_bytes

STATE = hash_bytes(b"state")
LEDGER = hash_bytes(b"ledger")


def _votes(auth, seq=100, signers=(0, 1, 2, 3), state=STATE):
    return [make_checkpoint(auth, i, seq, state, LEDGER) for i in signers]


def test_vote_validity(auth):
    vote = make_checkpoint(auth, 1, 100, STATE, LEDGER)
    assert checkpoint_vote_valid(auth, vote, 100)
    assert not checkpoint_vote_valid(auth, vote, 30)
    assert not checkpoint_vote_valid(auth, replace(vote, signer=2), 100)
    assert not checkpoint_vote_valid(auth, make_checkpoint(auth, 1, 0, STATE, LEDGER), 100)


def test_tracker_certifies_at_nf_matching_votes(auth):
    tracker = CheckpointTracker(nf=3)
    votes = _votes(auth)
    assert tracker.add(votes[0]) is None
    assert tracker.add(votes[0]) is None
    assert tracker.add(votes[1]) is None
    cert = tracker.add(votes[2])
    assert cert is not None
    assert cert.signers == (0, 1, 2)
    assert certificate_valid(auth, cert, nf=3, interval=100)
    assert tracker.add(votes[3]) is None


def test_tracker_does_not_mix_disagreeing_votes(auth):
    tracker = CheckpointTracker(nf=3)
    tracker.add(_votes(auth, signers=(0,))[0])
    tracker.add(_votes(auth, signers=(1,), state=hash_bytes(b"other"))[0])
    assert tracker.add(_votes(auth, signers=(2,))[0]) is None
    assert tracker.add(_votes(auth, signers=(3,))[0]) is not None


def test_tracker_replaces_a_signers_vote_after_reexecution(auth):
    tracker = CheckpointTracker(nf=3)
    stale = _votes(auth, signers=(0,), state=hash_bytes(b"stale"))[0]
    tracker.add(stale)
    tracker.add(_votes(auth, signers=(1,))[0])
    assert tracker.add(_votes(auth, signers=(2,), state=hash_bytes(b"stale"))[0]) is None
    cert = tracker.add(_votes(auth, signers=(0,))[0])
    assert cert is None
    cert = tracker.add(_votes(auth, signers=(3,))[0])
    assert cert is not None
    assert cert.signers == (0, 1, 3)
    assert cert.state_digest == STATE


def test_certificate_with_repeated_signer_invalid(auth):
    tracker = CheckpointTracker(nf=3)
    for vote in _votes(auth, signers=(0, 1, 2)):
        cert = tracker.add(vote)
    assert cert is not None
    forged = replace(cert, votes=(cert.votes[0], cert.votes[0], cert.votes[1]))
    assert not certificate_valid(auth, forged, nf=3, interval=100)


def test_state_reply_must_match_certificate(cluster):
    for nonce in range(3):
        cluster.submit(cluster.txn(0, nonce, b"put k%d v" % nonce))
    # nothing stable yet with the default interval; build the reply by hand
    replica = cluster.replicas[0]
    snapshot = replica.store.snapshot()
    blocks = tuple(replica.ledger.blocks)
    auth = cluster.auth
    votes = [
        make_checkpoint(
            auth, i, snapshot.seq, replica.store.state_digest(), replica.ledger.tip_hash
        )
        for i in range(3)
    ]
    tracker = CheckpointTracker(nf=3)
    cert = None
    for vote in votes:
        cert = tracker.add(vote)
    assert cert is not None
    reply = StateReplyMsg(snapshot=snapshot, blocks=blocks, certificate=cert)
    assert state_reply_valid(auth, reply, replica.ledger.genesis)
    tampered = replace(snapshot, kv=(("k0", "evil"),))
    assert not state_reply_valid(auth, replace(reply, snapshot=tampered), replica.ledger.genesis)
    assert not state_reply_valid(auth, replace(reply, blocks=blocks[:-1]), replica.ledger.genesis)
