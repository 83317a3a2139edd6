from __future__ import annotations

import pytest

from core.consensus.codec import make_batch, sign_transaction
from core.consensus.ledger import Ledger, diff_ledgers, genesis_hash, parse_lines
from core.consensus.messages import CertifyMsg
from core.domain.errors import (
    InvalidProof,
    MalformedMessage,
    OutOfOrderAppend,
    TruncateBelowCheckpoint,
)
from core.infrastructure.crypto import proposal_digest


def _proof(auth, seq: int, view: int, digest: bytes) -> CertifyMsg:
    h = proposal_digest(seq, view, digest)
    ts = auth.aggregate([auth.sign_share(i, h) for i in range(3)])
    return CertifyMsg(view=view, seq=seq, ts=ts)


def _digest(auth, seq: int) -> bytes:
    return make_batch([sign_transaction(auth, 0, seq, b"put k%d v" % seq)]).digest


def _ledger(auth, length: int, view: int = 0) -> Ledger:
    ledger = Ledger(auth)
    for seq in range(length):
        d = _digest(auth, seq)
        ledger.append_block(seq, view, d, _proof(auth, seq, view, d))
    return ledger


def test_chain_links_and_verifies(auth):
    ledger = _ledger(auth, 3)
    assert ledger.tip_seq == 2
    assert ledger.blocks[0].prev_hash == genesis_hash(0)
    assert ledger.blocks[2].prev_hash == ledger.hash_at(1)
    assert ledger.verify_chain()


def test_genesis_depends_on_initial_primary():
    assert genesis_hash(0) != genesis_hash(1)


def test_append_out_of_order_rejected(auth):
    ledger = _ledger(auth, 1)
    d = _digest(auth, 2)
    with pytest.raises(OutOfOrderAppend):
        ledger.append_block(2, 0, d, _proof(auth, 2, 0, d))


def test_append_with_wrong_proof_rejected(auth):
    ledger = Ledger(auth)
    d = _digest(auth, 0)
    with pytest.raises(InvalidProof):
        ledger.append_block(0, 0, d, _proof(auth, 0, 1, d))


def test_truncate_respects_sealed_checkpoint(auth):
    ledger = _ledger(auth, 4)
    ledger.seal(1)
    ledger.truncate(2)
    assert ledger.tip_seq == 2
    with pytest.raises(TruncateBelowCheckpoint):
        ledger.truncate(0)


def test_export_parse_and_diff(auth):
    a = _ledger(auth, 3)
    b = _ledger(auth, 2)
    blocks_a = parse_lines(a.export_lines())
    assert blocks_a == a.blocks
    diff = diff_ledgers(blocks_a, parse_lines(b.export_lines()))
    assert diff.prefix_consistent and not diff.identical
    assert (diff.length_a, diff.length_b) == (3, 2)


def test_diff_reports_first_divergent_seq(auth):
    a = _ledger(auth, 3, view=0)
    b = _ledger(auth, 3, view=1)
    diff = diff_ledgers(a.blocks, b.blocks)
    assert diff.first_divergence == 0
    assert not diff.prefix_consistent


def test_parse_rejects_garbage():
    with pytest.raises(MalformedMessage):
        parse_lines(["zz-not-hex"])


def test_install_replaces_chain_and_seals(auth):
    source = _ledger(auth, 3)
    target = Ledger(auth)
    target.install(source.blocks)
    assert target.tip_hash == source.tip_hash
    assert target.sealed_seq == 2


def test_install_rejects_broken_chain(auth):
    source = _ledger(auth, 3)
    target = Ledger(auth)
    with pytest.raises(InvalidProof):
        target.install(source.blocks[1:])
