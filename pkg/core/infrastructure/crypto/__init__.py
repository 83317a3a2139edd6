"""Authenticator implementations and hashing helpers."""

from .hashing import hash_bytes, proposal_digest
from .keyed import KeyedAuthenticator
from .null import NullAuthenticator

__all__ = [
    "hash_bytes",
    "proposal_digest",
    "KeyedAuthenticator",
    "NullAuthenticator",
]
