"""Discrete-event simulator over virtual time.

Events are ordered by (virtual_time, sender rank, per-sender counter), so a
run is a pure function of its scenario. Replicas rank 0..n-1 and clients
follow them; timer events rank by their owner.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from core.consensus.client import Client
from core.consensus.codec import encode, message_kind
from core.consensus.messages import Send
from core.consensus.records import SETUP, CommitRecord, Transition
from core.consensus.replica import Replica
from core.consensus.workload import Workload
from core.domain.auth import MacTag
from core.domain.interfaces import Authenticator
from core.domain.types import BROADCAST, client_addr, parse_addr, replica_addr
from core.infrastructure.crypto import KeyedAuthenticator, NullAuthenticator
from core.infrastructure.logging.structured import get_logger
from core.simulation.adversary import Adversary, AdversaryContext, Outgoing, build_adversary
from core.simulation.metrics import Metrics, MetricsCollector
from core.simulation.scenario import Scenario
from core.simulation.trace import EventKind, TraceEvent

logger = get_logger(__name__)


@dataclass(frozen=True, slots=True)
class _Deliver:
    src: str
    dst: str
    msg: Any
    mac: MacTag | None
    data: bytes | None


@dataclass(frozen=True, slots=True)
class _TimerFire:
    owner: str
    key: tuple
    generation: int


class NodeEnvironment:
    """NodeEnv handed to one state machine."""

    __slots__ = ("_sim", "_address")

    def __init__(self, sim: Simulation, address: str) -> None:
        self._sim = sim
        self._address = address

    def now(self) -> float:
        return self._sim.now

    def set_timer(self, key: tuple, delay: float) -> None:
        self._sim.set_timer(self._address, key, delay)

    def cancel_timer(self, key: tuple) -> None:
        self._sim.cancel_timer(self._address, key)

    def record(self, record: Any) -> None:
        self._sim.record(self._address, record)


@dataclass(slots=True)
class SimulationResult:
    scenario: Scenario
    trace: list[TraceEvent]
    metrics: Metrics
    replicas: list[Replica]
    clients: list[Client]
    faulty: frozenset[int] = field(default_factory=frozenset)

    def ledger_lines(self) -> dict[int, list[str]]:
        return {r.id: r.ledger.export_lines() for r in self.replicas}

    @property
    def all_committed(self) -> bool:
        return self.metrics.commits == self.metrics.submitted


def _timer_note(key: tuple) -> str:
    return ":".join(str(part) for part in key)


class Simulation:
    def __init__(self, scenario: Scenario, auth: Authenticator | None = None) -> None:
        scenario.validate()
        self.scenario = scenario
        n, nf = scenario.n, scenario.nf
        if auth is None:
            if scenario.authenticate:
                auth = KeyedAuthenticator(n, nf, secret=f"poe-sim/{scenario.seed}".encode())
            else:
                auth = NullAuthenticator(n, nf)
        self.auth = auth
        self.rng = np.random.default_rng(scenario.seed)
        self.adversary: Adversary = build_adversary(scenario.adversary, n, scenario.f)
        self.adversary.bind(
            AdversaryContext(
                n=n,
                f=scenario.f,
                scheme=scenario.scheme,
                auth=auth,
                rng=np.random.default_rng([scenario.seed, 0xAD]),
            )
        )
        self.faulty = frozenset(self.adversary.faulty)
        self.now = 0.0
        self.trace: list[TraceEvent] = []
        self.metrics = MetricsCollector(n, nf, self.faulty, scenario.sample_interval)

        self._queue: list[tuple[float, int, int, Any]] = []
        self._counters: dict[str, int] = defaultdict(int)
        self._timers: dict[tuple[str, tuple], int] = {}
        self._generation = 0
        self._record_messages = scenario.record_messages

        self.replica_addrs = [replica_addr(i) for i in range(n)]
        self.replicas = [
            Replica(scenario.replica_config(i), auth, NodeEnvironment(self, replica_addr(i)))
            for i in range(n)
        ]
        self.clients = [
            Client(
                j,
                n,
                scenario.f,
                auth,
                NodeEnvironment(self, client_addr(j)),
                workload=Workload(scenario.workload, scenario.seed, j),
                timeout=scenario.client_timeout,
                timers_enabled=scenario.timers_enabled,
                cap_exponent=scenario.backoff_cap_exponent,
            )
            for j in range(scenario.clients)
        ]
        self.nodes: dict[str, Replica | Client] = {r.address: r for r in self.replicas}
        self.nodes.update({c.address: c for c in self.clients})
        self._ranks = {addr: i for i, addr in enumerate(self.replica_addrs)}
        self._ranks.update({c.address: n + c.id for c in self.clients})

    # === Scheduling ===

    def _push(self, time: float, sender: str, event: Any) -> None:
        self._counters[sender] += 1
        heapq.heappush(self._queue, (time, self._ranks[sender], self._counters[sender], event))

    def set_timer(self, owner: str, key: tuple, delay: float) -> None:
        self._generation += 1
        self._timers[(owner, key)] = self._generation
        self._push(self.now + delay, owner, _TimerFire(owner, key, self._generation))

    def cancel_timer(self, owner: str, key: tuple) -> None:
        self._timers.pop((owner, key), None)

    def record(self, address: str, record: Any) -> None:
        kind = EventKind.CLIENT_COMMIT if isinstance(record, CommitRecord) else EventKind.STATE_TRANSITION
        self.trace.append(TraceEvent(self.now, kind, address, payload=record))
        self.metrics.on_record(record)

    def _log_message(self, kind: EventKind, src: str, dst: str, msg: Any, note: str = "") -> None:
        if self._record_messages:
            self.trace.append(TraceEvent(self.now, kind, src, dst, msg, note))

    # === Network ===

    def _replica_id(self, address: str) -> int | None:
        kind, ident = parse_addr(address)
        return ident if kind == "r" else None

    def _crashed(self, address: str) -> bool:
        replica = self._replica_id(address)
        return replica is not None and self.adversary.crashed(replica, self.now)

    def _partitioned(self, src: str, dst: str) -> bool:
        a, b = self._replica_id(src), self._replica_id(dst)
        if a is None or b is None:
            return False
        return any(p.separates(a, b, self.now) for p in self.scenario.partitions)

    def _sample_delay(self) -> float:
        model = self.scenario.delay
        if model.kind == "fixed":
            return model.low
        return float(self.rng.uniform(model.low, model.high))

    def _emit(self, src: str, sends: list[Send]) -> None:
        src_replica = self._replica_id(src)
        hooked = src_replica is not None and src_replica in self.faulty
        for send in sends:
            dests = self.replica_addrs if send.dest == BROADCAST else (send.dest,)
            for dest in dests:
                if hooked:
                    assert src_replica is not None
                    outgoing = self.adversary.outbound(src_replica, dest, send.msg, self.now)
                else:
                    outgoing = [Outgoing(dest, send.msg)]
                for out in outgoing:
                    self._transmit(src, out)

    def _transmit(self, src: str, out: Outgoing) -> None:
        msg = out.msg
        self.metrics.on_send(message_kind(msg))
        if self._partitioned(src, out.dest) or (
            self.scenario.drop_rate > 0 and self.rng.random() < self.scenario.drop_rate
        ):
            self._log_message(EventKind.DROP, src, out.dest, msg, "network")
            return
        delay = self._sample_delay() + out.extra_delay
        src_replica = self._replica_id(src)
        if src_replica is not None:
            delay += self.adversary.link_delay(src_replica, out.dest)
        mac = data = None
        if self.scenario.authenticate:
            data = encode(msg)
            mac = self.auth.mac(src, out.dest, data)
        claimed = out.claimed or src
        self._log_message(EventKind.SEND, claimed, out.dest, msg)
        self._push(self.now + delay, src, _Deliver(claimed, out.dest, msg, mac, data))

    def _deliver(self, ev: _Deliver) -> None:
        if self._crashed(ev.dst):
            self._log_message(EventKind.DROP, ev.src, ev.dst, ev.msg, "crashed")
            return
        if ev.mac is not None:
            assert ev.data is not None
            authentic = (
                ev.mac.sender == ev.src
                and ev.mac.receiver == ev.dst
                and self.auth.verify_mac(ev.mac, ev.data)
            )
            if not authentic:
                self._log_message(EventKind.DROP, ev.src, ev.dst, ev.msg, "mac")
                return
        self._log_message(EventKind.DELIVER, ev.src, ev.dst, ev.msg)
        dst_replica = self._replica_id(ev.dst)
        if dst_replica is not None and dst_replica in self.faulty:
            for out in self.adversary.inbound(dst_replica, ev.src, ev.msg, self.now):
                self._transmit(ev.dst, out)
        node = self.nodes.get(ev.dst)
        if node is None:
            return
        self._emit(ev.dst, node.on_message(ev.src, ev.msg))

    def _fire(self, ev: _TimerFire) -> None:
        if self._timers.get((ev.owner, ev.key)) != ev.generation:
            return
        del self._timers[(ev.owner, ev.key)]
        if self._crashed(ev.owner):
            return
        if self._record_messages:
            self.trace.append(
                TraceEvent(self.now, EventKind.TIMER_FIRE, ev.owner, note=_timer_note(ev.key))
            )
        self._emit(ev.owner, self.nodes[ev.owner].on_timer(ev.key))

    # === Run ===

    def _done(self) -> bool:
        return all(c.done for c in self.clients)

    def run(self) -> SimulationResult:
        scenario = self.scenario
        self.record(
            replica_addr(0),
            Transition(
                replica=-1,
                name=SETUP,
                view=scenario.f,
                aux=scenario.n,
                aux_digest=bytes(sorted(self.faulty)),
            ),
        )
        for client in self.clients:
            self._emit(client.address, client.start())
        self.metrics.on_submit(sum(c.state.nonce for c in self.clients))

        drain_deadline: float | None = None
        target = scenario.decision_target
        while self._queue:
            time, _, _, event = self._queue[0]
            if time > scenario.duration:
                self.now = scenario.duration
                break
            heapq.heappop(self._queue)
            self.metrics.sample_until(time)
            self.now = time
            submitted = sum(c.state.nonce for c in self.clients)
            if isinstance(event, _Deliver):
                self._deliver(event)
            else:
                self._fire(event)
            self.metrics.on_submit(sum(c.state.nonce for c in self.clients) - submitted)
            if target is not None and self.metrics.metrics.decisions >= target:
                break
            if drain_deadline is None:
                if self.clients and self._done():
                    drain_deadline = self.now + scenario.drain_time
            elif self.now >= drain_deadline:
                break

        metrics = self.metrics.finish(self.now)
        logger.debug(
            "simulation finished",
            seed=scenario.seed,
            decisions=metrics.decisions,
            commits=metrics.commits,
            virtual_time=self.now,
        )
        return SimulationResult(
            scenario=scenario,
            trace=self.trace,
            metrics=metrics,
            replicas=self.replicas,
            clients=self.clients,
            faulty=self.faulty,
        )


def run(scenario: Scenario) -> SimulationResult:
    """Simulate `scenario` to completion."""
    return Simulation(scenario).run()
