"""Authenticator value types (shares, threshold signatures, MACs)."""

from __future__ import annotations

from dataclasses import dataclass

from core.domain.types import ClientId, Digest, ReplicaId


@dataclass(frozen=True, slots=True)
class SignatureShare:
    signer: ReplicaId
    digest: Digest
    tag: bytes


@dataclass(frozen=True, slots=True)
class ThresholdSignature:
    """Aggregate of nf shares; `contributors` is sorted ascending."""

    digest: Digest
    contributors: tuple[ReplicaId, ...]
    tag: bytes


@dataclass(frozen=True, slots=True)
class ClientSignature:
    client: ClientId
    payload_digest: Digest
    tag: bytes


@dataclass(frozen=True, slots=True)
class MacTag:
    sender: str
    receiver: str
    tag: bytes
