"""In-process replica cluster with synchronous FIFO delivery.

Replicas talk through `Cluster.route`; messages to clients are collected in
`client_inbox`, messages to isolated replicas are parked in `held`.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable
from typing import Any

import pytest

from core.consensus.codec import make_batch, sign_transaction
from core.consensus.messages import Batch, CertifyMsg, Send, SignedTransaction
from core.consensus.replica import Replica
from core.domain.types import BROADCAST, ReplicaConfig, client_addr, parse_addr, replica_addr
from core.infrastructure.crypto import KeyedAuthenticator, proposal_digest


class FakeEnv:
    def __init__(self) -> None:
        self.time = 0.0
        self.timers: dict[tuple, float] = {}
        self.records: list[Any] = []

    def now(self) -> float:
        return self.time

    def set_timer(self, key: tuple, delay: float) -> None:
        self.timers[key] = self.time + delay

    def cancel_timer(self, key: tuple) -> None:
        self.timers.pop(key, None)

    def record(self, record: Any) -> None:
        self.records.append(record)

    def names(self) -> list[str]:
        return [getattr(r, "name", type(r).__name__) for r in self.records]


class Cluster:
    def __init__(self, n: int = 4, f: int = 1, **config: Any) -> None:
        self.n = n
        self.f = f
        self.auth = KeyedAuthenticator(n, n - f, secret=b"cluster")
        self.envs = [FakeEnv() for _ in range(n)]
        self.replicas = [
            Replica(ReplicaConfig(id=i, n=n, f=f, **config), self.auth, self.envs[i])
            for i in range(n)
        ]
        self.isolated: set[int] = set()
        self.held: list[tuple[str, str, Any]] = []
        self.client_inbox: list[tuple[str, str, Any]] = []

    def txn(self, client: int, nonce: int, payload: bytes) -> SignedTransaction:
        return sign_transaction(self.auth, client, nonce, payload)

    def batch(self, *txns: SignedTransaction) -> Batch:
        return make_batch(txns)

    def certify(self, view: int, seq: int, batch: Batch, signers: Iterable[int]) -> CertifyMsg:
        h = proposal_digest(seq, view, batch.digest)
        shares = [self.auth.sign_share(i, h) for i in signers]
        return CertifyMsg(view=view, seq=seq, ts=self.auth.aggregate(shares))

    def route(self, src: str, sends: Iterable[Send]) -> None:
        queue = deque((src, s) for s in sends)
        while queue:
            sender, send = queue.popleft()
            if send.dest == BROADCAST:
                dests = [replica_addr(i) for i in range(self.n)]
            else:
                dests = [send.dest]
            for dest in dests:
                kind, ident = parse_addr(dest)
                if kind == "c":
                    self.client_inbox.append((sender, dest, send.msg))
                    continue
                if ident in self.isolated:
                    self.held.append((sender, dest, send.msg))
                    continue
                out = self.replicas[ident].on_message(sender, send.msg)
                queue.extend((dest, s) for s in out)

    def submit(self, txn: SignedTransaction, to: int = 0) -> None:
        self.route(client_addr(txn.client), [Send(replica_addr(to), txn)])

    def informs_for(self, client: int) -> list[tuple[str, Any]]:
        addr = client_addr(client)
        return [(src, msg) for src, dest, msg in self.client_inbox if dest == addr]


@pytest.fixture()
def make_cluster():
    return Cluster


@pytest.fixture()
def cluster() -> Cluster:
    return Cluster()


@pytest.fixture()
def auth() -> KeyedAuthenticator:
    return KeyedAuthenticator(4, 3, secret=b"unit")


@pytest.fixture()
def fake_env() -> FakeEnv:
    return FakeEnv()
