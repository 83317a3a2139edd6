"""Simulation-grade keyed-hash authenticator.

Every replica and client owns a key derived from a run secret. A share tag
is an HMAC of (signer, digest) under the signer's key; an aggregate is the
hash of the canonical sorted list of nf (signer, tag) pairs. The verifying
side acts as the oracle that knows every key, so a tag for a non-faulty
signer cannot be produced without calling `sign_share` for that signer.
"""

from __future__ import annotations

import hashlib
import hmac
import struct
from collections.abc import Iterable

from core.domain.auth import (
    ClientSignature,
    MacTag,
    SignatureShare,
    ThresholdSignature,
)
from core.domain.errors import CryptoError, InsufficientShares, MixedDigests
from core.domain.types import DIGEST_SIZE, ClientId, Digest, ReplicaId

_ID = struct.Struct(">q")


def _derive(label: bytes, secret: bytes, ident: bytes) -> bytes:
    return hashlib.sha256(label + b"|" + secret + b"|" + ident).digest()


class KeyedAuthenticator:
    """HMAC-SHA256 based shares, threshold aggregates, client sigs and MACs."""

    def __init__(self, n: int, threshold: int, secret: bytes = b"poe-sim") -> None:
        if threshold < 1 or threshold > n:
            raise CryptoError(f"threshold {threshold} outside 1..{n}")
        self.n = n
        self.threshold = threshold
        self._secret = secret
        self._replica_keys = [
            _derive(b"replica", secret, _ID.pack(i)) for i in range(n)
        ]
        self._client_keys: dict[ClientId, bytes] = {}
        self._link_keys: dict[tuple[str, str], bytes] = {}

    # shares

    def _share_tag(self, signer: ReplicaId, digest: Digest) -> bytes:
        key = self._replica_keys[signer]
        return hmac.new(key, _ID.pack(signer) + digest, hashlib.sha256).digest()

    def sign_share(self, signer: ReplicaId, digest: Digest) -> SignatureShare:
        if not 0 <= signer < self.n:
            raise CryptoError(f"unknown signer {signer}")
        return SignatureShare(signer, digest, self._share_tag(signer, digest))

    def verify_share(self, share: SignatureShare) -> bool:
        if not 0 <= share.signer < self.n or len(share.digest) != DIGEST_SIZE:
            return False
        expected = self._share_tag(share.signer, share.digest)
        return hmac.compare_digest(expected, share.tag)

    # threshold signatures

    @staticmethod
    def _combine(digest: Digest, pairs: Iterable[tuple[ReplicaId, bytes]]) -> bytes:
        h = hashlib.sha256(b"ts|" + digest)
        for signer, tag in pairs:
            h.update(_ID.pack(signer))
            h.update(tag)
        return h.digest()

    def aggregate(
        self, shares: Iterable[SignatureShare], nf: int | None = None
    ) -> ThresholdSignature:
        """Combine shares into a threshold signature.

        Raises:
            MixedDigests: shares sign different digests.
            InsufficientShares: fewer than nf distinct signers verify.
        """
        need = self.threshold if nf is None else nf
        shares = list(shares)
        if len({s.digest for s in shares}) > 1:
            raise MixedDigests("shares disagree on the signed digest")
        valid: dict[ReplicaId, SignatureShare] = {}
        for share in shares:
            if share.signer not in valid and self.verify_share(share):
                valid[share.signer] = share
        if len(valid) < need:
            raise InsufficientShares(
                f"{len(valid)} distinct valid signers, need {need}"
            )
        digest = shares[0].digest
        chosen = sorted(valid)[:need]
        tag = self._combine(digest, ((i, valid[i].tag) for i in chosen))
        return ThresholdSignature(digest, tuple(chosen), tag)

    def verify_threshold(self, ts: ThresholdSignature, digest: Digest) -> bool:
        contributors = ts.contributors
        if ts.digest != digest or len(contributors) != self.threshold:
            return False
        if list(contributors) != sorted(set(contributors)):
            return False
        if contributors[0] < 0 or contributors[-1] >= self.n:
            return False
        expected = self._combine(
            digest, ((i, self._share_tag(i, digest)) for i in contributors)
        )
        return hmac.compare_digest(expected, ts.tag)

    # client signatures

    def _client_key(self, client: ClientId) -> bytes:
        key = self._client_keys.get(client)
        if key is None:
            key = _derive(b"client", self._secret, _ID.pack(client))
            self._client_keys[client] = key
        return key

    def sign_client(self, client: ClientId, payload_digest: Digest) -> ClientSignature:
        tag = hmac.new(self._client_key(client), payload_digest, hashlib.sha256)
        return ClientSignature(client, payload_digest, tag.digest())

    def verify_client(self, sig: ClientSignature, payload_digest: Digest) -> bool:
        if sig.payload_digest != payload_digest:
            return False
        expected = hmac.new(
            self._client_key(sig.client), payload_digest, hashlib.sha256
        ).digest()
        return hmac.compare_digest(expected, sig.tag)

    # pairwise MACs

    def _link_key(self, a: str, b: str) -> bytes:
        pair = (a, b) if a <= b else (b, a)
        key = self._link_keys.get(pair)
        if key is None:
            key = _derive(b"link", self._secret, f"{pair[0]}|{pair[1]}".encode())
            self._link_keys[pair] = key
        return key

    def mac(self, sender: str, receiver: str, data: bytes) -> MacTag:
        tag = hmac.new(self._link_key(sender, receiver), data, hashlib.sha256)
        return MacTag(sender, receiver, tag.digest())

    def verify_mac(self, tag: MacTag, data: bytes) -> bool:
        expected = hmac.new(
            self._link_key(tag.sender, tag.receiver), data, hashlib.sha256
        ).digest()
        return hmac.compare_digest(expected, tag.tag)
