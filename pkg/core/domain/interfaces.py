"""Domain protocols that define core contracts.

These `Protocol` interfaces decouple the consensus state machines from the
concrete authenticator and from the environment (simulator or test double)
that delivers their messages and fires their timers.
"""

from __future__ import annotations

from collections.abc import Iterable
from typing import Any, Protocol, runtime_checkable

from core.domain.auth import (
    ClientSignature,
    MacTag,
    SignatureShare,
    ThresholdSignature,
)
from core.domain.types import ClientId, Digest, ReplicaId


@runtime_checkable
class Authenticator(Protocol):
    """Contract for authenticated-communication primitives.

    `threshold` is the number of distinct shares (nf) an aggregate needs.
    """

    threshold: int

    def sign_share(self, signer: ReplicaId, digest: Digest) -> SignatureShare: ...

    def verify_share(self, share: SignatureShare) -> bool: ...

    def aggregate(
        self, shares: Iterable[SignatureShare], nf: int | None = None
    ) -> ThresholdSignature: ...

    def verify_threshold(self, ts: ThresholdSignature, digest: Digest) -> bool: ...

    def sign_client(self, client: ClientId, payload_digest: Digest) -> ClientSignature: ...

    def verify_client(self, sig: ClientSignature, payload_digest: Digest) -> bool: ...

    def mac(self, sender: str, receiver: str, data: bytes) -> MacTag: ...

    def verify_mac(self, tag: MacTag, data: bytes) -> bool: ...


@runtime_checkable
class NodeEnv(Protocol):
    """What a state machine may ask of its environment.

    Timers are keyed; arming an existing key replaces it. `record` appends a
    ground-truth record (transition or client commit) to the run's trace.
    """

    def now(self) -> float: ...

    def set_timer(self, key: tuple, delay: float) -> None: ...

    def cancel_timer(self, key: tuple) -> None: ...

    def record(self, record: Any) -> None: ...


@runtime_checkable
class Node(Protocol):
    """A sequential state machine driven by messages and timers."""

    address: str

    def on_message(self, sender: str, msg: Any) -> list: ...

    def on_timer(self, key: tuple) -> list: ...
