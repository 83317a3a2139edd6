"""Authenticator that computes nothing; used by the latency simulation."""

from __future__ import annotations

from collections.abc import Iterable

from core.domain.auth import (
    ClientSignature,
    MacTag,
    SignatureShare,
    ThresholdSignature,
)
from core.domain.errors import InsufficientShares, MixedDigests
from core.domain.types import ClientId, Digest, ReplicaId


class NullAuthenticator:
    """Accepts every tag; only the distinct-signer count is enforced."""

    def __init__(self, n: int, threshold: int) -> None:
        self.n = n
        self.threshold = threshold

    def sign_share(self, signer: ReplicaId, digest: Digest) -> SignatureShare:
        return SignatureShare(signer, digest, b"")

    def verify_share(self, share: SignatureShare) -> bool:
        return True

    def aggregate(
        self, shares: Iterable[SignatureShare], nf: int | None = None
    ) -> ThresholdSignature:
        need = self.threshold if nf is None else nf
        shares = list(shares)
        if len({s.digest for s in shares}) > 1:
            raise MixedDigests("shares disagree on the signed digest")
        signers = sorted({s.signer for s in shares})
        if len(signers) < need:
            raise InsufficientShares(f"{len(signers)} distinct signers, need {need}")
        return ThresholdSignature(shares[0].digest, tuple(signers[:need]), b"")

    def verify_threshold(self, ts: ThresholdSignature, digest: Digest) -> bool:
        return ts.digest == digest

    def sign_client(self, client: ClientId, payload_digest: Digest) -> ClientSignature:
        return ClientSignature(client, payload_digest, b"")

    def verify_client(self, sig: ClientSignature, payload_digest: Digest) -> bool:
        return True

    def mac(self, sender: str, receiver: str, data: bytes) -> MacTag:
        return MacTag(sender, receiver, b"")

    def verify_mac(self, tag: MacTag, data: bytes) -> bool:
        return True
