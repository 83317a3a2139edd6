"""Keyed read/write workload for simulated clients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, slots=True)
class WorkloadSpec:
    """Per-client request mix.

    `outstanding` bounds in-flight requests (closed loop); latency runs use
    an open loop with `outstanding == requests`.
    """

    requests: int = 10
    keyspace: int = 100
    write_ratio: float = 0.9
    outstanding: int = 1
    padding: int = 0


class Workload:
    """Seeded generator of `put`/`get` command payloads for one client."""

    def __init__(self, spec: WorkloadSpec, seed: int, client_id: int) -> None:
        self.spec = spec
        self.client_id = client_id
        self._rng = np.random.default_rng([seed, client_id])
        self._issued = 0

    @property
    def remaining(self) -> int:
        return self.spec.requests - self._issued

    def next_payload(self) -> bytes | None:
        if self._issued >= self.spec.requests:
            return None
        nonce = self._issued
        self._issued += 1
        key = int(self._rng.integers(0, self.spec.keyspace))
        if self._rng.random() < self.spec.write_ratio:
            command = f"put k{key} v{self.client_id}.{nonce}"
        else:
            command = f"get k{key}"
        payload = command.encode("ascii")
        if self.spec.padding:
            payload += b"\x00" * self.spec.padding
        return payload
