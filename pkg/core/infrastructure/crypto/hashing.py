"""Collision-resistant hashing (SHA-256, 32-byte digests)."""

from __future__ import annotations

import hashlib
import struct

from core.domain.types import Digest

_SEQ_VIEW = struct.Struct(">qq")


def hash_bytes(data: bytes) -> Digest:
    """Map an arbitrary octet string to a 32-byte digest."""
    return hashlib.sha256(data).digest()


def proposal_digest(seq: int, view: int, batch_digest: Digest) -> Digest:
    """Digest h = H(k || v || d) signed by supporting replicas.

    Integers are packed fixed-width so the concatenation is unambiguous.
    """
    return hash_bytes(_SEQ_VIEW.pack(seq, view) + batch_digest)
