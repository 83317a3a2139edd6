from __future__ import annotations

import pytest

from core.domain.auth import SignatureShare, ThresholdSignature
from core.domain.errors import CryptoError, InsufficientShares, MixedDigests
from core.domain.interfaces import Authenticator
from core.infrastructure.crypto import KeyedAuthenticator, NullAuthenticator, hash_bytes

H = hash_bytes(b"proposal")


def test_authenticators_satisfy_protocol():
    assert isinstance(KeyedAuthenticator(4, 3), Authenticator)
    assert isinstance(NullAuthenticator(4, 3), Authenticator)


def test_threshold_out_of_range_rejected():
    with pytest.raises(CryptoError):
        KeyedAuthenticator(4, 5)


def test_share_roundtrip_and_forgery(auth):
    share = auth.sign_share(2, H)
    assert auth.verify_share(share)
    assert not auth.verify_share(SignatureShare(1, H, share.tag))
    assert not auth.verify_share(SignatureShare(2, hash_bytes(b"other"), share.tag))


def test_aggregate_and_verify(auth):
    ts = auth.aggregate([auth.sign_share(i, H) for i in (3, 1, 0)])
    assert ts.contributors == (0, 1, 3)
    assert auth.verify_threshold(ts, H)
    assert not auth.verify_threshold(ts, hash_bytes(b"other"))


def test_aggregate_ignores_duplicates_and_invalid_shares(auth):
    good = [auth.sign_share(0, H), auth.sign_share(0, H), auth.sign_share(1, H)]
    bad = SignatureShare(2, H, b"\x00" * 32)
    with pytest.raises(InsufficientShares):
        auth.aggregate([*good, bad])


def test_aggregate_rejects_mixed_digests(auth):
    shares = [auth.sign_share(0, H), auth.sign_share(1, H), auth.sign_share(2, hash_bytes(b"x"))]
    with pytest.raises(MixedDigests):
        auth.aggregate(shares)


def test_threshold_signature_needs_exact_sorted_contributors(auth):
    ts = auth.aggregate([auth.sign_share(i, H) for i in range(4)])
    assert len(ts.contributors) == 3
    shuffled = ThresholdSignature(ts.digest, (1, 0, 2), ts.tag)
    assert not auth.verify_threshold(shuffled, H)
    short = ThresholdSignature(ts.digest, ts.contributors[:2], ts.tag)
    assert not auth.verify_threshold(short, H)


def test_authenticators_with_different_secrets_disagree():
    a = KeyedAuthenticator(4, 3, secret=b"a")
    b = KeyedAuthenticator(4, 3, secret=b"b")
    assert not b.verify_share(a.sign_share(0, H))


def test_client_signature(auth):
    sig = auth.sign_client(5, H)
    assert auth.verify_client(sig, H)
    assert not auth.verify_client(sig, hash_bytes(b"x"))


def test_link_mac_is_symmetric_per_pair(auth):
    tag = auth.mac("r0", "r1", b"payload")
    assert auth.verify_mac(tag, b"payload")
    assert not auth.verify_mac(tag, b"payloaD")
    assert auth.mac("r1", "r0", b"payload").tag == tag.tag
    assert auth.mac("r0", "r2", b"payload").tag != tag.tag


def test_null_authenticator_counts_signers_only():
    null = NullAuthenticator(4, 3)
    ts = null.aggregate([null.sign_share(i, H) for i in (2, 0, 1)])
    assert ts.contributors == (0, 1, 2)
    assert null.verify_threshold(ts, H)
    with pytest.raises(InsufficientShares):
        null.aggregate([null.sign_share(0, H), null.sign_share(0, H)])
