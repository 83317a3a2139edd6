"""Exception hierarchy for poe-sim.

Protocol-level errors are raised by operation functions and caught by the
replica dispatcher, which drops the offending input. Configuration and
input errors surface at the CLI and map onto stable exit codes.
"""

from __future__ import annotations

from typing import Any


class PoeError(Exception):
    """Base class for every error raised by this package."""


# crypto


class CryptoError(PoeError):
    """Authenticator misuse or failed aggregation."""


class InsufficientShares(CryptoError):
    """Fewer than nf distinct valid signers were supplied to aggregate."""


class MixedDigests(CryptoError):
    """Shares handed to aggregate disagree on the signed digest."""


# codec


class MalformedMessage(PoeError):
    """Bytes that do not decode to a message (truncation, unknown tag, ...)."""


# protocol


class ProtocolError(PoeError):
    """Input rejected by a protocol state machine."""


class NotPrimary(ProtocolError):
    pass


class InvalidClientSignature(ProtocolError):
    pass


class DuplicateRequest(ProtocolError):
    """The (client, nonce) pair was already proposed or executed.

    Attributes:
        cached: inform message to re-send when the request was executed.
    """

    def __init__(self, message: str, cached: Any | None = None) -> None:
        super().__init__(message)
        self.cached = cached


class WatermarkExceeded(ProtocolError):
    pass


class InvalidNewView(ProtocolError):
    pass


# ledger


class LedgerError(PoeError):
    pass


class OutOfOrderAppend(LedgerError):
    pass


class InvalidProof(LedgerError):
    pass


class TruncateBelowCheckpoint(LedgerError):
    pass


class OutOfOrderExecution(LedgerError):
    """The datastore was asked to execute or revert an entry out of order."""


# configuration / inputs


class ConfigInvalid(PoeError, ValueError):
    """Scenario or run configuration rejected."""


class TraceFormatError(PoeError):
    """A trace or ledger file could not be parsed."""


class TemplateMissing(PoeError):
    """A name outside the packaged poe templates was rendered."""
