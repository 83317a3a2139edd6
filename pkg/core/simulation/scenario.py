"""Scenario: everything that determines one simulated run."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

from core.consensus.workload import WorkloadSpec
from core.domain.errors import ConfigInvalid
from core.domain.types import ReplicaConfig, Scheme

# Effectively "never" for checkpoint and watermark limits in latency runs.
UNBOUNDED = 1 << 40


@dataclass(frozen=True, slots=True)
class DelayModel:
    kind: str = "uniform"
    low: float = 0.5
    high: float = 1.5

    @classmethod
    def fixed(cls, value: float) -> DelayModel:
        return cls(kind="fixed", low=value, high=value)

    def validate(self) -> None:
        if self.kind not in ("fixed", "uniform"):
            raise ConfigInvalid(f"unknown delay model {self.kind!r}")
        if self.low <= 0 or self.high < self.low:
            raise ConfigInvalid(f"invalid delay bounds ({self.low}, {self.high})")


@dataclass(frozen=True, slots=True)
class Partition:
    """Between `start` and `end`, replicas in different groups cannot talk."""

    start: float
    end: float
    groups: tuple[tuple[int, ...], ...]

    def separates(self, a: int, b: int, now: float) -> bool:
        if not self.start <= now < self.end:
            return False
        return self.group_of(a) != self.group_of(b)

    def group_of(self, replica: int) -> int:
        for index, group in enumerate(self.groups):
            if replica in group:
                return index
        return -1 - replica


@dataclass(frozen=True, slots=True)
class AdversarySpec:
    program: str = "none"
    params: tuple[tuple[str, Any], ...] = ()

    @classmethod
    def of(cls, program: str, **params: Any) -> AdversarySpec:
        return cls(program=program, params=tuple(sorted(params.items())))

    @property
    def kwargs(self) -> dict[str, Any]:
        return dict(self.params)


@dataclass(frozen=True, slots=True)
class Scenario:
    """A complete, seed-determined simulation setup."""

    n: int = 4
    f: int = 1
    seed: int = 0
    scheme: Scheme = Scheme.TS
    clients: int = 2
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    client_timeout: float = 30.0
    delay: DelayModel = field(default_factory=DelayModel)
    drop_rate: float = 0.0
    partitions: tuple[Partition, ...] = ()
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    duration: float = 5000.0
    decision_target: int | None = None
    drain_time: float = 50.0
    watermark_window: int = 250
    checkpoint_interval: int = 100
    timeout_base: float = 10.0
    batch_size: int = 1
    flush_timeout: float = 1.0
    pipeline_depth: int = 250
    backoff_cap_exponent: int = 10
    timers_enabled: bool = True
    authenticate: bool = True
    record_messages: bool = True
    sample_interval: float = 10.0

    @property
    def nf(self) -> int:
        return self.n - self.f

    def replica_config(self, replica: int) -> ReplicaConfig:
        return ReplicaConfig(
            id=replica,
            n=self.n,
            f=self.f,
            scheme=self.scheme,
            watermark_window=self.watermark_window,
            checkpoint_interval=self.checkpoint_interval,
            timeout_base=self.timeout_base,
            batch_size=self.batch_size,
            flush_timeout=self.flush_timeout,
            pipeline_depth=self.pipeline_depth,
            backoff_cap_exponent=self.backoff_cap_exponent,
            timers_enabled=self.timers_enabled,
        )

    def validate(self) -> None:
        """Raise ConfigInvalid for any setting that cannot produce a valid run."""
        self.replica_config(0).validate()
        self.delay.validate()
        if not 0.0 <= self.drop_rate < 1.0:
            raise ConfigInvalid(f"drop_rate must be in [0, 1), got {self.drop_rate}")
        if self.clients < 0:
            raise ConfigInvalid("clients must be >= 0")
        spec = self.workload
        if spec.requests < 0 or spec.keyspace < 1 or spec.outstanding < 1 or spec.padding < 0:
            raise ConfigInvalid("invalid workload settings")
        if not 0.0 <= spec.write_ratio <= 1.0:
            raise ConfigInvalid("write_ratio must be in [0, 1]")
        if self.duration <= 0 or self.client_timeout <= 0 or self.sample_interval <= 0:
            raise ConfigInvalid("duration, client_timeout and sample_interval must be positive")
        if self.decision_target is not None and self.decision_target < 1:
            raise ConfigInvalid("decision_target must be >= 1")
        for partition in self.partitions:
            if partition.end < partition.start:
                raise ConfigInvalid("partition ends before it starts")
            for group in partition.groups:
                if any(not 0 <= r < self.n for r in group):
                    raise ConfigInvalid(f"partition group {group} names unknown replicas")

    def with_seed(self, seed: int) -> Scenario:
        return replace(self, seed=seed)

    @classmethod
    def latency(
        cls, n: int, delay: float, window: int, decisions: int = 500, f: int | None = None
    ) -> Scenario:
        """Message-delay throughput setup.

        Fixed delays, no adversary, no authentication cost, no timers; one
        open-loop client submits every request at time zero and the primary
        keeps at most `window` proposals in flight.
        """
        faults = (n - 1) // 3 if f is None else f
        return cls(
            n=n,
            f=faults,
            seed=0,
            clients=1,
            workload=WorkloadSpec(requests=decisions, outstanding=decisions),
            delay=DelayModel.fixed(delay),
            decision_target=decisions,
            duration=float(UNBOUNDED),
            watermark_window=UNBOUNDED,
            checkpoint_interval=UNBOUNDED,
            pipeline_depth=window,
            timers_enabled=False,
            authenticate=False,
            record_messages=False,
            sample_interval=float(UNBOUNDED),
        )
