"""Value types shared by the consensus and simulation layers."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

from core.domain.errors import ConfigInvalid

ReplicaId = int
ClientId = int
Digest = bytes

DIGEST_SIZE = 32
BROADCAST = "*"


class Scheme(str, Enum):
    """Authentication scheme used for view-commit."""

    TS = "ts"
    MAC = "mac"


class Status(IntEnum):
    """Per-sequence log status; monotone within a view."""

    PROPOSED = 0
    SUPPORTED = 1
    VIEW_COMMITTED = 2
    EXECUTED = 3


class Phase(str, Enum):
    ACTIVE = "active"
    COLLECTING = "collecting"
    AWAITING_NEW_VIEW = "awaiting-new-view"


def replica_addr(replica: ReplicaId) -> str:
    return f"r{replica}"


def client_addr(client: ClientId) -> str:
    return f"c{client}"


def parse_addr(addr: str) -> tuple[str, int]:
    """Split a node address into its kind ("r" or "c") and numeric id."""
    if len(addr) < 2 or addr[0] not in "rc" or not addr[1:].isdigit():
        raise ValueError(f"invalid node address: {addr!r}")
    return addr[0], int(addr[1:])


@dataclass(frozen=True, slots=True)
class ReplicaConfig:
    """Static configuration of one replica.

    `pipeline_depth` bounds how many proposals the primary keeps in flight
    ahead of its own execution; `watermark_window` bounds which sequence
    numbers a backup accepts above its stable checkpoint.
    """

    id: ReplicaId
    n: int
    f: int
    scheme: Scheme = Scheme.TS
    watermark_window: int = 250
    checkpoint_interval: int = 100
    timeout_base: float = 10.0
    batch_size: int = 1
    flush_timeout: float = 1.0
    pipeline_depth: int = 250
    backoff_cap_exponent: int = 10
    timers_enabled: bool = True

    @property
    def nf(self) -> int:
        return self.n - self.f

    def primary_of(self, view: int) -> ReplicaId:
        return view % self.n

    def validate(self) -> None:
        if self.f < 0 or self.n <= 3 * self.f:
            raise ConfigInvalid(f"n must exceed 3f (n={self.n}, f={self.f})")
        if not 0 <= self.id < self.n:
            raise ConfigInvalid(f"replica id {self.id} outside 0..{self.n - 1}")
        if self.watermark_window < 1 or self.checkpoint_interval < 1:
            raise ConfigInvalid("watermark_window and checkpoint_interval must be >= 1")
        if self.watermark_window < self.checkpoint_interval:
            raise ConfigInvalid("watermark_window must be >= checkpoint_interval")
        if self.batch_size < 1 or self.pipeline_depth < 1:
            raise ConfigInvalid("batch_size and pipeline_depth must be >= 1")
        if self.timeout_base <= 0:
            raise ConfigInvalid("timeout_base must be positive")
