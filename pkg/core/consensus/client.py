"""Client state machine: submit, collect nf matching informs, retry by broadcast."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any

from core.consensus.codec import request_digest, sign_transaction
from core.consensus.messages import InformMsg, Send, SignedTransaction
from core.consensus.records import CommitRecord
from core.consensus.workload import Workload
from core.domain.interfaces import Authenticator, NodeEnv
from core.domain.types import (
    BROADCAST,
    ClientId,
    Digest,
    ReplicaId,
    client_addr,
    parse_addr,
    replica_addr,
)
from core.infrastructure.logging.structured import get_logger
from core.reliability.backoff import DEFAULT_BACKOFF_CAP_EXPONENT, compute_backoff

logger = get_logger(__name__)

DEFAULT_CLIENT_TIMEOUT = 30.0


@dataclass(slots=True)
class PendingRequest:
    txn: SignedTransaction
    digest: Digest
    sent_at: float
    informs: dict[ReplicaId, InformMsg] = field(default_factory=dict)
    attempts: int = 0


@dataclass(slots=True)
class ClientState:
    id: ClientId
    nonce: int = 0
    pending: dict[int, PendingRequest] = field(default_factory=dict)
    committed: dict[int, tuple[int, int, bytes]] = field(default_factory=dict)


class Client:
    """A PoE client.

    A request counts as executed once nf distinct replicas sent informs that
    agree on (view, seq, result, digest). Informs from any view are accepted.
    """

    def __init__(
        self,
        client_id: ClientId,
        n: int,
        f: int,
        auth: Authenticator,
        env: NodeEnv,
        workload: Workload | None = None,
        timeout: float = DEFAULT_CLIENT_TIMEOUT,
        timers_enabled: bool = True,
        cap_exponent: int = DEFAULT_BACKOFF_CAP_EXPONENT,
    ) -> None:
        self.state = ClientState(id=client_id)
        self.address = client_addr(client_id)
        self.n = n
        self.nf = n - f
        self._auth = auth
        self._env = env
        self._workload = workload
        self._timeout = timeout
        self._timers_enabled = timers_enabled
        self._cap_exponent = cap_exponent
        self._by_digest: dict[Digest, int] = {}
        self.believed_view = 0
        self._log = logger.bind(client=client_id)

    @property
    def id(self) -> ClientId:
        return self.state.id

    @property
    def done(self) -> bool:
        exhausted = self._workload is None or self._workload.remaining == 0
        return exhausted and not self.state.pending

    def start(self) -> list[Send]:
        return self._fill()

    def _fill(self) -> list[Send]:
        out: list[Send] = []
        if self._workload is None:
            return out
        while len(self.state.pending) < self._workload.spec.outstanding:
            payload = self._workload.next_payload()
            if payload is None:
                break
            out.extend(self.submit(payload))
        return out

    def submit(self, payload: bytes) -> list[Send]:
        """Sign `payload` with a fresh nonce and send it to the believed primary."""
        nonce = self.state.nonce
        self.state.nonce += 1
        txn = sign_transaction(self._auth, self.id, nonce, payload)
        digest = request_digest(txn)
        self.state.pending[nonce] = PendingRequest(txn=txn, digest=digest, sent_at=self._env.now())
        self._by_digest[digest] = nonce
        if self._timers_enabled:
            self._env.set_timer(("client", nonce), self._timeout)
        return [Send(replica_addr(self.believed_view % self.n), txn)]

    def on_message(self, sender: str, msg: Any) -> list[Send]:
        if not isinstance(msg, InformMsg):
            return []
        try:
            kind, replica = parse_addr(sender)
        except ValueError:
            return []
        if kind != "r" or replica >= self.n:
            return []
        if self.on_inform(msg, replica) is None:
            return []
        return self._fill()

    def on_inform(self, m: InformMsg, replica: ReplicaId) -> CommitRecord | None:
        """Store an inform; return the commit when nf of them agree."""
        nonce = self._by_digest.get(m.txn_digest)
        if nonce is None:
            return None
        pending = self.state.pending.get(nonce)
        if pending is None:
            return None
        pending.informs[replica] = m
        self.believed_view = max(self.believed_view, m.view)
        votes = Counter(
            (i.view, i.seq, i.result, i.txn_digest) for i in pending.informs.values()
        )
        (view, seq, result, digest), count = max(votes.items(), key=lambda kv: (kv[1], kv[0]))
        if count < self.nf:
            return None
        del self.state.pending[nonce]
        del self._by_digest[digest]
        self.state.committed[nonce] = (view, seq, result)
        if self._timers_enabled:
            self._env.cancel_timer(("client", nonce))
        record = CommitRecord(
            client=self.id,
            nonce=nonce,
            view=view,
            seq=seq,
            txn_digest=digest,
            result=result,
            latency=self._env.now() - pending.sent_at,
        )
        self._env.record(record)
        return record

    def on_timer(self, key: tuple) -> list[Send]:
        if key[0] != "client":
            return []
        return self.on_timeout(key[1])

    def on_timeout(self, nonce: int) -> list[Send]:
        """Broadcast a still-pending request to every replica and back off."""
        pending = self.state.pending.get(nonce)
        if pending is None:
            return []
        pending.attempts += 1
        delay = compute_backoff(self._timeout, pending.attempts, self._cap_exponent)
        self._env.set_timer(("client", nonce), delay)
        self._log.debug("request timed out, broadcasting", nonce=nonce, attempts=pending.attempts)
        return [Send(BROADCAST, pending.txn)]
