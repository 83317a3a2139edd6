"""Replica state machine: normal case, view change and checkpointing.

A replica is driven by `on_message` and `on_timer`; both return the
messages to send. Broadcasts go to every replica including the sender, and
self-delivered copies are idempotent. Byzantine input is expected: handlers
raise `ProtocolError` subclasses and the dispatcher drops the input.

Normal case (TS scheme): the primary proposes, backups send a signature
share to the primary, the primary aggregates nf shares into a certify
message, and replicas view-commit, execute speculatively and inform the
client. In the MAC scheme supports are broadcast and each replica
view-commits on nf matching supports including its own.
"""

from __future__ import annotations

from collections import defaultdict, deque
from collections.abc import Callable
from typing import Any

from core.consensus import view_change as vc
from core.consensus.checkpoint import (
    CheckpointTracker,
    certificate_valid,
    checkpoint_vote_valid,
    make_checkpoint,
    state_reply_valid,
)
from core.consensus.codec import (
    batch_digest,
    make_batch,
    vc_signing_digest,
    verify_transaction,
)
from core.consensus.datastore import Datastore
from core.consensus.ledger import Ledger
from core.consensus.log import LogEntry
from core.consensus.messages import (
    Batch,
    Block,
    CertifyMsg,
    CheckpointCertificate,
    CheckpointMsg,
    HistoryEntry,
    InformMsg,
    NvProposeMsg,
    ProposeMsg,
    Send,
    SignedTransaction,
    StateReplyMsg,
    StateRequestMsg,
    StateSnapshot,
    SupportMsg,
    VcRequestMsg,
)
from core.consensus.records import (
    EXECUTE,
    NEW_VIEW,
    ROLLBACK,
    STABLE_CHECKPOINT,
    STATE_TRANSFER,
    VC_REQUEST,
    VIEW_COMMIT,
    Transition,
)
from core.domain.auth import SignatureShare
from core.domain.errors import (
    DuplicateRequest,
    InvalidClientSignature,
    InvalidNewView,
    NotPrimary,
    ProtocolError,
    WatermarkExceeded,
)
from core.domain.interfaces import Authenticator, NodeEnv
from core.domain.types import (
    BROADCAST,
    Phase,
    ReplicaConfig,
    ReplicaId,
    Scheme,
    Status,
    client_addr,
    parse_addr,
    replica_addr,
)
from core.infrastructure.logging.structured import get_logger

logger = get_logger(__name__)

RequestKey = tuple[int, int]

FLUSH_TIMER = ("flush",)
PROGRESS_TIMER = ("progress",)
LAGGING_TIMER = ("lagging",)

FUTURE_BUFFER_LIMIT = 10_000


def _inform_of(row: Any) -> InformMsg:
    return InformMsg(view=row.view, seq=row.seq, txn_digest=row.txn_digest, result=row.result)


class Replica:
    """One PoE replica."""

    def __init__(self, config: ReplicaConfig, auth: Authenticator, env: NodeEnv) -> None:
        config.validate()
        self.config = config
        self.id: ReplicaId = config.id
        self.address = replica_addr(config.id)
        self._auth = auth
        self._env = env
        self._log = logger.bind(replica=config.id)

        self.view = 0
        self.phase = Phase.ACTIVE
        self.entries: dict[int, LogEntry] = {}
        self.store = Datastore()
        self.ledger = Ledger(auth, initial_primary=config.primary_of(0))
        self.low_watermark = -1
        self.stable_cert: CheckpointCertificate | None = None

        # primary side
        self._next_seq = 0
        self._queue: deque[SignedTransaction] = deque()
        self._queued: set[RequestKey] = set()
        self._in_flight: set[RequestKey] = set()
        self._flush_armed = False

        # backup side
        self._deferred: dict[int, tuple[str, ProposeMsg]] = {}
        self._early: dict[tuple[int, int], list[CertifyMsg]] = defaultdict(list)
        self._mac_supports: dict[tuple[int, int], dict[ReplicaId, SignatureShare]] = (
            defaultdict(dict)
        )
        self._future: list[tuple[str, Any]] = []

        # client requests known here but not yet executed
        self._pending: dict[RequestKey, SignedTransaction] = {}
        self._request_timers: set[RequestKey] = set()
        self._progress_mark: int | None = None

        self.vc = vc.ViewChangeState()

        self._checkpoints = CheckpointTracker(config.nf)
        self._own_checkpoints: dict[int, CheckpointMsg] = {}
        self._snapshots: dict[int, tuple[StateSnapshot, tuple[Block, ...]]] = {}
        self._serving: StateReplyMsg | None = None
        self._transfer: CheckpointCertificate | None = None
        self._transfer_attempt = 0
        self._lagging: CheckpointCertificate | None = None

        self._handlers: dict[type, Callable[[str, Any], list[Send]]] = {
            SignedTransaction: self._on_request,
            ProposeMsg: self.backup_on_propose,
            SupportMsg: self._on_support,
            CertifyMsg: self.replica_on_certify,
            VcRequestMsg: self.on_vc_request,
            NvProposeMsg: self.on_nv_propose,
            CheckpointMsg: self.on_checkpoint,
            StateRequestMsg: self.on_state_request,
            StateReplyMsg: self.on_state_reply,
        }

    # === Properties ===

    @property
    def applied_seq(self) -> int:
        return self.store.applied_seq

    @property
    def primary(self) -> ReplicaId:
        return self.config.primary_of(self.view)

    @property
    def is_primary(self) -> bool:
        return self.primary == self.id

    @property
    def pending_requests(self) -> dict[RequestKey, SignedTransaction]:
        return dict(self._pending)

    # === Dispatch ===

    def on_message(self, sender: str, msg: Any) -> list[Send]:
        handler = self._handlers.get(type(msg))
        if handler is None:
            self._log.debug("unexpected message", sender=sender, kind=type(msg).__name__)
            return []
        try:
            return handler(sender, msg)
        except ProtocolError as exc:
            self._log.debug(
                "dropped input",
                sender=sender,
                kind=type(msg).__name__,
                reason=f"{type(exc).__name__}: {exc}",
            )
            return []

    def on_timer(self, key: tuple) -> list[Send]:
        kind = key[0]
        if kind == "flush":
            self._flush_armed = False
            return self._maybe_propose(force=True)
        if kind == "request":
            return self._on_request_timeout((key[1], key[2]))
        if kind == "progress":
            return self._on_progress_timeout()
        if kind == "view_change":
            return self._on_view_change_timeout(key[1])
        if kind == "state_transfer":
            return self._on_transfer_timeout(key[1])
        if kind == "lagging":
            return self._on_lagging_timeout()
        return []

    # === Helpers ===

    def _record(self, name: str, **fields: Any) -> None:
        self._env.record(Transition(replica=self.id, name=name, **fields))

    def _arm(self, key: tuple, delay: float) -> None:
        if self.config.timers_enabled:
            self._env.set_timer(key, delay)

    def _cancel(self, key: tuple) -> None:
        if self.config.timers_enabled:
            self._env.cancel_timer(key)

    def _timeout(self) -> float:
        return self.vc.timeout(self.config.timeout_base, self.config.backoff_cap_exponent)

    def _sender_replica(self, sender: str) -> ReplicaId | None:
        try:
            kind, ident = parse_addr(sender)
        except ValueError:
            return None
        if kind != "r" or ident >= self.config.n:
            return None
        return ident

    def _buffer_future(self, sender: str, msg: Any) -> list[Send]:
        if len(self._future) < FUTURE_BUFFER_LIMIT:
            self._future.append((sender, msg))
        return []

    def _batch_valid(self, batch: Batch) -> bool:
        if not batch.requests or batch.digest != batch_digest(batch.requests):
            return False
        return all(verify_transaction(self._auth, txn) for txn in batch.requests)

    # === Client requests ===

    def _on_request(self, sender: str, txn: SignedTransaction) -> list[Send]:
        if not verify_transaction(self._auth, txn):
            raise InvalidClientSignature(f"bad signature on request {txn.key}")
        if self.is_primary and self.phase is Phase.ACTIVE:
            try:
                return self.primary_on_request(txn)
            except DuplicateRequest as dup:
                if dup.cached is not None:
                    return [Send(client_addr(txn.client), dup.cached)]
                return []
        return self.replica_on_client_forward(sender, txn)

    def primary_on_request(self, txn: SignedTransaction) -> list[Send]:
        """Queue a client request for proposal.

        Raises:
            NotPrimary: this replica does not lead the current view.
            InvalidClientSignature: the client signature does not verify.
            DuplicateRequest: already queued, proposed or executed; carries
                the cached inform when executed.
        """
        if not self.is_primary:
            raise NotPrimary(f"replica {self.id} is not primary of view {self.view}")
        if not verify_transaction(self._auth, txn):
            raise InvalidClientSignature(f"bad signature on request {txn.key}")
        row = self.store.lookup(*txn.key)
        if row is not None:
            raise DuplicateRequest(f"request {txn.key} already executed", cached=_inform_of(row))
        if txn.key in self._queued or txn.key in self._in_flight:
            raise DuplicateRequest(f"request {txn.key} already proposed")
        self._queue.append(txn)
        self._queued.add(txn.key)
        self._pending.setdefault(txn.key, txn)
        return self._maybe_propose()

    def replica_on_client_forward(self, sender: str, txn: SignedTransaction) -> list[Send]:
        """Backup path: re-send a cached inform or forward to the primary and arm a timer."""
        if not verify_transaction(self._auth, txn):
            raise InvalidClientSignature(f"bad signature on request {txn.key}")
        row = self.store.lookup(*txn.key)
        if row is not None:
            return [Send(client_addr(txn.client), _inform_of(row))]
        if self._sender_replica(sender) is not None:
            # forwarded copies matter only to the primary
            return []
        self._pending.setdefault(txn.key, txn)
        out: list[Send] = []
        if self.phase is Phase.ACTIVE:
            out.append(Send(replica_addr(self.primary), txn))
        if txn.key not in self._request_timers and self.config.timers_enabled:
            self._request_timers.add(txn.key)
            self._arm(("request", *txn.key), self._timeout())
        return out

    def _on_request_timeout(self, key: RequestKey) -> list[Send]:
        self._request_timers.discard(key)
        if self.store.lookup(*key) is not None or self.phase is not Phase.ACTIVE:
            return []
        return self.detect_failure(self.view, vc.REQUEST_TIMEOUT)

    # === Primary: proposing ===

    def _maybe_propose(self, force: bool = False) -> list[Send]:
        out: list[Send] = []
        if not self.is_primary or self.phase is not Phase.ACTIVE:
            return out
        cfg = self.config
        while self._queue:
            if self._next_seq > self.applied_seq + cfg.pipeline_depth:
                break
            if self._next_seq > self.low_watermark + cfg.watermark_window:
                break
            if len(self._queue) < cfg.batch_size and not force and cfg.timers_enabled:
                if not self._flush_armed:
                    self._flush_armed = True
                    self._arm(FLUSH_TIMER, cfg.flush_timeout)
                break
            requests: list[SignedTransaction] = []
            while self._queue and len(requests) < cfg.batch_size:
                txn = self._queue.popleft()
                self._queued.discard(txn.key)
                if self.store.lookup(*txn.key) is None and txn.key not in self._in_flight:
                    requests.append(txn)
                    self._in_flight.add(txn.key)
            if requests:
                out.extend(self._propose(make_batch(requests)))
            force = False
        return out

    def _propose(self, batch: Batch) -> list[Send]:
        seq = self._next_seq
        self._next_seq += 1
        entry = LogEntry(seq=seq, view=self.view, batch=batch, status=Status.SUPPORTED)
        share = self._auth.sign_share(self.id, entry.proposal_digest)
        entry.support_shares[self.id] = share
        self.entries[seq] = entry
        self._arm_progress()
        out = [Send(BROADCAST, ProposeMsg(view=self.view, seq=seq, batch=batch))]
        if self.config.scheme is Scheme.MAC:
            self._mac_supports[(self.view, seq)][self.id] = share
            out.append(Send(BROADCAST, SupportMsg(view=self.view, seq=seq, share=share)))
            out.extend(self._check_mac_commit(entry))
        else:
            out.extend(self._maybe_certify(entry))
        return out

    # === Backup: supporting ===

    def backup_on_propose(self, sender: str, m: ProposeMsg) -> list[Send]:
        if m.view > self.view:
            return self._buffer_future(sender, m)
        if m.view < self.view or self.phase is not Phase.ACTIVE:
            return []
        if sender != replica_addr(self.config.primary_of(m.view)):
            raise NotPrimary(f"propose for view {m.view} from {sender}")
        entry = self.entries.get(m.seq)
        if entry is not None and (entry.view == m.view or entry.status >= Status.VIEW_COMMITTED):
            return []
        if m.seq <= max(self.low_watermark, self.applied_seq):
            return []
        if m.seq > self.low_watermark + self.config.watermark_window:
            self._deferred.setdefault(m.seq, (sender, m))
            raise WatermarkExceeded(f"seq {m.seq} beyond watermark {self.low_watermark}")
        if not self._batch_valid(m.batch):
            raise InvalidClientSignature(f"invalid batch at seq {m.seq}")

        entry = LogEntry(seq=m.seq, view=m.view, batch=m.batch, status=Status.SUPPORTED)
        self.entries[m.seq] = entry
        for txn in m.batch.requests:
            if self.store.lookup(*txn.key) is None:
                self._pending.setdefault(txn.key, txn)
        self._arm_progress()
        share = self._auth.sign_share(self.id, entry.proposal_digest)
        support = SupportMsg(view=m.view, seq=m.seq, share=share)
        if self.config.scheme is Scheme.MAC:
            self._mac_supports[(m.view, m.seq)][self.id] = share
            return [Send(BROADCAST, support), *self._check_mac_commit(entry)]

        out = [Send(replica_addr(self.primary), support)]
        for certify in self._early.pop((m.view, m.seq), []):
            if self._auth.verify_threshold(certify.ts, entry.proposal_digest):
                out.extend(self._view_commit(entry, certify))
                break
        return out

    def _on_support(self, sender: str, m: SupportMsg) -> list[Send]:
        if m.view > self.view:
            return self._buffer_future(sender, m)
        if m.view < self.view or self.phase is not Phase.ACTIVE:
            return []
        signer = self._sender_replica(sender)
        if signer is None or m.share.signer != signer:
            raise ProtocolError(f"support share signer mismatch from {sender}")
        if self.config.scheme is Scheme.MAC:
            return self._mac_on_support(m)
        return self.primary_on_support(m)

    def primary_on_support(self, m: SupportMsg) -> list[Send]:
        if not self.is_primary:
            raise NotPrimary("support sent to a backup")
        entry = self.entries.get(m.seq)
        if entry is None or entry.view != m.view or entry.batch is None or entry.certify_sent:
            return []
        share = m.share
        if share.digest != entry.proposal_digest or not self._auth.verify_share(share):
            return []
        entry.support_shares.setdefault(share.signer, share)
        return self._maybe_certify(entry)

    def _maybe_certify(self, entry: LogEntry) -> list[Send]:
        if entry.certify_sent or len(entry.support_shares) < self.config.nf:
            return []
        ts = self._auth.aggregate(entry.support_shares.values(), self.config.nf)
        entry.certify_sent = True
        return [Send(BROADCAST, CertifyMsg(view=entry.view, seq=entry.seq, ts=ts))]

    def _mac_on_support(self, m: SupportMsg) -> list[Send]:
        if m.seq <= self.low_watermark or not self._auth.verify_share(m.share):
            return []
        self._mac_supports[(m.view, m.seq)].setdefault(m.share.signer, m.share)
        entry = self.entries.get(m.seq)
        if entry is not None and entry.view == m.view and entry.status is Status.SUPPORTED:
            return self._check_mac_commit(entry)
        return []

    def _check_mac_commit(self, entry: LogEntry) -> list[Send]:
        pool = self._mac_supports.get((entry.view, entry.seq), {})
        h = entry.proposal_digest
        own = pool.get(self.id)
        if own is None or own.digest != h:
            return []
        matching = [s for s in pool.values() if s.digest == h]
        if len(matching) < self.config.nf:
            return []
        ts = self._auth.aggregate(matching, self.config.nf)
        return self._view_commit(entry, CertifyMsg(view=entry.view, seq=entry.seq, ts=ts))

    # === View-commit and execution ===

    def replica_on_certify(self, sender: str, m: CertifyMsg) -> list[Send]:
        if m.view > self.view:
            return self._buffer_future(sender, m)
        if m.view < self.view or self.phase is not Phase.ACTIVE:
            return []
        if self.config.scheme is Scheme.MAC:
            return []
        entry = self.entries.get(m.seq)
        if entry is None or entry.view != m.view or entry.batch is None:
            if m.seq > max(self.low_watermark, self.applied_seq):
                early = self._early[(m.view, m.seq)]
                if len(early) < self.config.n:
                    early.append(m)
            return []
        if entry.status is not Status.SUPPORTED:
            return []
        if not self._auth.verify_threshold(m.ts, entry.proposal_digest):
            return []
        return self._view_commit(entry, m)

    def _view_commit(self, entry: LogEntry, proof: CertifyMsg) -> list[Send]:
        assert entry.batch is not None
        entry.status = Status.VIEW_COMMITTED
        entry.certify = proof
        self._record(VIEW_COMMIT, view=entry.view, seq=entry.seq, digest=entry.batch.digest)
        return self.try_execute()

    def try_execute(self) -> list[Send]:
        """Execute every view-committed entry whose predecessor is executed.

        Nothing executes outside the normal case: once a vc-request is out,
        the history it carries must stay the replica's full executed history.
        """
        out: list[Send] = []
        if self.phase is not Phase.ACTIVE:
            return out
        progressed = False
        interval = self.config.checkpoint_interval
        while True:
            entry = self.entries.get(self.applied_seq + 1)
            if entry is None or entry.status is not Status.VIEW_COMMITTED:
                break
            assert entry.batch is not None and entry.certify is not None
            execution = self.store.execute(entry.view, entry.seq, entry.batch)
            entry.status = Status.EXECUTED
            entry.undo = execution.undo
            entry.request_keys = execution.request_keys
            entry.results = execution.results
            self.ledger.append_block(entry.seq, entry.view, entry.batch.digest, entry.certify)
            self._record(
                EXECUTE,
                view=entry.view,
                seq=entry.seq,
                digest=entry.batch.digest,
                aux_digest=self.ledger.tip_hash,
            )
            for txn, inform in execution.informs:
                out.append(Send(client_addr(txn.client), inform))
            for txn in entry.batch.requests:
                self._settle_request(txn.key)
            progressed = True
            if entry.seq > 0 and entry.seq % interval == 0:
                out.extend(self.emit_checkpoint())
        if progressed:
            self._arm_progress(reset=True)
            lagging = self._lagging
            if lagging is not None and self.applied_seq >= lagging.seq:
                self._lagging = None
                self._cancel(LAGGING_TIMER)
                out.extend(self._on_stable_candidate(lagging))
            out.extend(self._maybe_propose())
        return out

    def _settle_request(self, key: RequestKey) -> None:
        self._pending.pop(key, None)
        self._in_flight.discard(key)
        if key in self._request_timers:
            self._request_timers.discard(key)
            self._cancel(("request", *key))

    def rollback(self, to_seq: int) -> None:
        """Revert executed entries (to_seq, applied_seq] in reverse order.

        `to_seq` is clamped to the stable checkpoint. If some entry in the
        range has no undo information the replica falls back to its stable
        state and re-executes the surviving entries.
        """
        to_seq = max(to_seq, self.low_watermark)
        previous = self.applied_seq
        if to_seq >= previous:
            return
        chain = [self.entries.get(seq) for seq in range(previous, to_seq, -1)]
        for table in (self._own_checkpoints, self._snapshots):
            for stale in [s for s in table if s > to_seq]:
                del table[stale]
        if any(entry is None or entry.undo is None for entry in chain):
            self._restore_stable(previous)
            return
        for entry in chain:
            assert entry is not None and entry.undo is not None
            self.store.revert(entry.seq, entry.undo, entry.request_keys)
            self._demote(entry)
        self.ledger.truncate(to_seq)
        self._record(ROLLBACK, view=self.view, seq=to_seq, aux=previous)
        self._log.info("rolled back speculative entries", to_seq=to_seq, previous=previous)

    @staticmethod
    def _demote(entry: LogEntry) -> None:
        entry.status = Status.VIEW_COMMITTED
        entry.undo = None
        entry.results = None
        entry.request_keys = ()

    def _restore_stable(self, previous: int) -> None:
        """Reinstall the last stable checkpoint (or the empty state) locally."""
        serving = self._serving
        if serving is not None and serving.certificate.seq == self.low_watermark:
            snapshot, blocks = serving.snapshot, serving.blocks
        else:
            snapshot, blocks = StateSnapshot(seq=-1, kv=(), executed=()), ()
        self.store.install(snapshot)
        self.ledger.install(blocks)
        for seq, entry in self.entries.items():
            if seq > snapshot.seq and entry.status is Status.EXECUTED:
                self._demote(entry)
        self._record(
            STATE_TRANSFER,
            view=self.view,
            seq=snapshot.seq,
            digest=self.store.state_digest(),
            aux_digest=self.ledger.tip_hash,
        )
        self._log.warning(
            "restored stable state for rollback", seq=snapshot.seq, previous=previous
        )

    def _stuck_entries(self) -> bool:
        return any(
            e.status is not Status.EXECUTED and e.view == self.view
            for s, e in self.entries.items()
            if s > self.applied_seq
        )

    def _arm_progress(self, reset: bool = False) -> None:
        if not self.config.timers_enabled:
            return
        if not self._stuck_entries():
            if self._progress_mark is not None:
                self._progress_mark = None
                self._cancel(PROGRESS_TIMER)
            return
        if self._progress_mark is None or reset:
            self._progress_mark = self.applied_seq
            self._arm(PROGRESS_TIMER, self._timeout())

    def _on_progress_timeout(self) -> list[Send]:
        mark, self._progress_mark = self._progress_mark, None
        if self.phase is not Phase.ACTIVE or not self._stuck_entries():
            return []
        if mark is not None and self.applied_seq > mark:
            self._arm_progress()
            return []
        return self.detect_failure(self.view, vc.PROGRESS_TIMEOUT)

    # === View change ===

    def _history(self) -> tuple[HistoryEntry, ...]:
        history = []
        for seq in range(self.low_watermark + 1, self.applied_seq + 1):
            entry = self.entries.get(seq)
            if entry is None or entry.certify is None or entry.batch is None:
                # the history must stay consecutive; report only the proven prefix
                self._log.warning("executed history has a gap", seq=seq)
                break
            history.append(HistoryEntry(certify=entry.certify, batch=entry.batch))
        return tuple(history)

    def detect_failure(self, target_view: int, cause: str) -> list[Send]:
        """Halt the normal case and broadcast a vc-request carrying our executed history."""
        if target_view < self.view or target_view <= self.vc.sent_for:
            return []
        history = self._history()
        digest = vc_signing_digest(target_view, history, self.stable_cert, self.id)
        m = VcRequestMsg(
            view=target_view,
            history=history,
            checkpoint=self.stable_cert,
            signer=self.id,
            sig=self._auth.sign_share(self.id, digest),
        )
        self.vc.sent_for = target_view
        self.vc.received(target_view)[self.id] = m
        next_primary = self.config.primary_of(target_view + 1)
        self.phase = Phase.COLLECTING if next_primary == self.id else Phase.AWAITING_NEW_VIEW
        self._halt_normal_case()
        self._record(VC_REQUEST, view=target_view, seq=m.last_seq)
        self._log.info(
            "suspecting primary",
            view=target_view,
            cause=cause,
            attempts=self.vc.attempts,
        )
        self._arm(("view_change", target_view), self._timeout())
        return [Send(BROADCAST, m), *self._maybe_propose_new_view(target_view)]

    def _halt_normal_case(self) -> None:
        for key in sorted(self._request_timers):
            self._cancel(("request", *key))
        self._request_timers.clear()
        if self._progress_mark is not None:
            self._progress_mark = None
            self._cancel(PROGRESS_TIMER)
        if self._flush_armed:
            self._flush_armed = False
            self._cancel(FLUSH_TIMER)

    def _on_view_change_timeout(self, target_view: int) -> list[Send]:
        if self.view > target_view or self.vc.sent_for != target_view:
            return []
        self.vc.attempts += 1
        return self.detect_failure(target_view + 1, vc.VIEW_CHANGE_TIMEOUT)

    def on_vc_request(self, sender: str, m: VcRequestMsg) -> list[Send]:
        signer = self._sender_replica(sender)
        if signer is None or signer != m.signer:
            raise ProtocolError(f"vc-request signer mismatch from {sender}")
        if m.view < self.view:
            return []
        received = self.vc.received(m.view)
        if m.signer in received:
            return []
        if not vc.validate_vc_request(self._auth, m, self.config):
            raise ProtocolError(f"invalid vc-request from replica {m.signer}")
        received[m.signer] = m
        out: list[Send] = []
        if m.view > self.vc.sent_for and len(received) >= self.config.f + 1:
            out.extend(self.detect_failure(m.view, vc.JOIN_QUORUM))
        out.extend(self._maybe_propose_new_view(m.view))
        return out

    def _maybe_propose_new_view(self, view: int) -> list[Send]:
        """Next primary: broadcast nv-propose once nf valid vc-requests are in."""
        new_view = view + 1
        if self.config.primary_of(new_view) != self.id or new_view in self.vc.nv_sent:
            return []
        if new_view <= self.view:
            return []
        received = self.vc.received(view)
        if len(received) < self.config.nf:
            return []
        proofs = tuple(received[s] for s in sorted(received)[: self.config.nf])
        self.vc.nv_sent.add(new_view)
        self._log.info("proposing new view", view=new_view)
        return [Send(BROADCAST, NvProposeMsg(new_view=new_view, proofs=proofs))]

    def on_nv_propose(self, sender: str, m: NvProposeMsg) -> list[Send]:
        if m.new_view <= self.view:
            return []
        proposer = self._sender_replica(sender)
        if proposer is None:
            raise NotPrimary(f"nv-propose from non-replica {sender}")
        try:
            chosen = vc.validate_nv_propose(self._auth, self.config, proposer, m)
        except InvalidNewView as exc:
            self._log.info("rejected new view", view=m.new_view, reason=str(exc))
            return self.detect_failure(m.new_view, vc.INVALID_NEW_VIEW)
        return self.adopt_new_view(m, chosen)

    @staticmethod
    def _matches_adopted(local: LogEntry | None, adopted: HistoryEntry | None) -> bool:
        # blocks chain the view, so the same batch certified in another view still differs
        if local is None or adopted is None or local.batch is None:
            return False
        return (
            local.batch.digest == adopted.batch.digest
            and local.view == adopted.certify.view
        )

    def adopt_new_view(self, m: NvProposeMsg, chosen: VcRequestMsg) -> list[Send]:
        """Enter `m.new_view` with the history carried by `chosen`."""
        history = {entry.seq: entry for entry in chosen.history}
        base = chosen.base_seq
        k_max = chosen.last_seq
        needs_transfer = base > self.applied_seq

        target = self.applied_seq
        if not needs_transfer:
            if (
                chosen.checkpoint is not None
                and base > self.low_watermark
                and self.ledger.hash_at(base) != chosen.checkpoint.ledger_digest
            ):
                target = self.low_watermark
                needs_transfer = True
            else:
                for seq in range(max(self.low_watermark, base) + 1, self.applied_seq + 1):
                    if not self._matches_adopted(self.entries.get(seq), history.get(seq)):
                        target = seq - 1
                        break
        self.rollback(target)
        needs_transfer = needs_transfer or base > self.applied_seq

        for seq in sorted(self.entries):
            entry = self.entries[seq]
            if entry.status is Status.EXECUTED:
                continue
            del self.entries[seq]
            if entry.batch is not None and seq not in history:
                for txn in entry.batch.requests:
                    if self.store.lookup(*txn.key) is None:
                        self._pending.setdefault(txn.key, txn)
        for seq, adopted in history.items():
            if seq <= self.applied_seq:
                continue
            certify = adopted.certify
            self.entries[seq] = LogEntry(
                seq=seq,
                view=certify.view,
                batch=adopted.batch,
                status=Status.VIEW_COMMITTED,
                certify=certify,
            )
            self._record(VIEW_COMMIT, view=certify.view, seq=seq, digest=adopted.batch.digest)

        self._cancel(("view_change", self.vc.sent_for))
        self.view = m.new_view
        self.phase = Phase.ACTIVE
        self.vc.attempts = 0
        self.vc.sent_for = m.new_view - 1
        self.vc.forget_below(m.new_view)
        self._deferred.clear()
        self._early.clear()
        self._mac_supports = defaultdict(
            dict, {k: v for k, v in self._mac_supports.items() if k[0] >= m.new_view}
        )
        self._record(NEW_VIEW, view=m.new_view, seq=k_max)
        self._log.info("adopted new view", view=m.new_view, k_max=k_max, signer=chosen.signer)

        # re-announce checkpoint votes that are not stable yet
        out: list[Send] = [
            Send(BROADCAST, vote)
            for seq, vote in sorted(self._own_checkpoints.items())
            if seq > self.low_watermark
        ]
        if needs_transfer and chosen.checkpoint is not None:
            out.extend(self.request_state_transfer(chosen.checkpoint))
        out.extend(self.try_execute())
        out.extend(self._restart_requests(k_max))
        out.extend(self._replay_future())
        return out

    def _restart_requests(self, k_max: int) -> list[Send]:
        self._queue.clear()
        self._queued.clear()
        self._in_flight = {
            key
            for entry in self.entries.values()
            if entry.batch is not None and entry.status is not Status.EXECUTED
            for key in (txn.key for txn in entry.batch.requests)
        }
        pending = [
            self._pending[key]
            for key in sorted(self._pending)
            if self.store.lookup(*key) is None
        ]
        if self.is_primary:
            self._next_seq = max(k_max, self.low_watermark, self.applied_seq) + 1
            for txn in pending:
                if txn.key not in self._in_flight:
                    self._queue.append(txn)
                    self._queued.add(txn.key)
            return self._maybe_propose()
        out: list[Send] = []
        primary = replica_addr(self.primary)
        for txn in pending:
            out.append(Send(primary, txn))
            if self.config.timers_enabled and txn.key not in self._request_timers:
                self._request_timers.add(txn.key)
                self._arm(("request", *txn.key), self._timeout())
        return out

    def _replay_future(self) -> list[Send]:
        ready = [(s, m) for s, m in self._future if m.view <= self.view]
        self._future = [(s, m) for s, m in self._future if m.view > self.view]
        out: list[Send] = []
        for sender, msg in ready:
            out.extend(self.on_message(sender, msg))
        return out

    # === Checkpointing ===

    def emit_checkpoint(self) -> list[Send]:
        seq = self.applied_seq
        m = make_checkpoint(
            self._auth, self.id, seq, self.store.state_digest(), self.ledger.tip_hash
        )
        self._own_checkpoints[seq] = m
        self._snapshots[seq] = (self.store.snapshot(), tuple(self.ledger.blocks))
        return [Send(BROADCAST, m), *self._add_checkpoint_vote(m)]

    def on_checkpoint(self, sender: str, m: CheckpointMsg) -> list[Send]:
        signer = self._sender_replica(sender)
        if signer is None or signer != m.signer:
            raise ProtocolError(f"checkpoint signer mismatch from {sender}")
        if m.seq <= self.low_watermark:
            return []
        if not checkpoint_vote_valid(self._auth, m, self.config.checkpoint_interval):
            raise ProtocolError(f"invalid checkpoint vote from replica {m.signer}")
        return self._add_checkpoint_vote(m)

    def _add_checkpoint_vote(self, m: CheckpointMsg) -> list[Send]:
        cert = self._checkpoints.add(m)
        return self._on_stable_candidate(cert) if cert is not None else []

    def _on_stable_candidate(self, cert: CheckpointCertificate) -> list[Send]:
        if cert.seq <= self.low_watermark:
            return []
        own = self._own_checkpoints.get(cert.seq)
        if own is not None and self.applied_seq < cert.seq:
            own = None
            del self._own_checkpoints[cert.seq]
        if own is not None and (own.state_digest, own.ledger_digest) == (
            cert.state_digest,
            cert.ledger_digest,
        ):
            return self._mark_stable(cert)
        if own is not None or self.applied_seq >= cert.seq:
            self._log.warning("state diverged from stable checkpoint", seq=cert.seq)
            return self.request_state_transfer(cert)
        if self._lagging is None or self._lagging.seq < cert.seq:
            self._lagging = cert
            if self.config.timers_enabled:
                self._arm(LAGGING_TIMER, self.config.timeout_base)
            else:
                return self.request_state_transfer(cert)
        return []

    def _on_lagging_timeout(self) -> list[Send]:
        cert, self._lagging = self._lagging, None
        if cert is None or self.applied_seq >= cert.seq or cert.seq <= self.low_watermark:
            return []
        return self.request_state_transfer(cert)

    def _mark_stable(self, cert: CheckpointCertificate) -> list[Send]:
        seq = cert.seq
        snapshot, blocks = self._snapshots[seq]
        self._serving = StateReplyMsg(snapshot=snapshot, blocks=blocks, certificate=cert)
        self._install_stable(cert)
        self._log.debug("checkpoint stable", seq=seq)
        return [*self._release_deferred(), *self._maybe_propose()]

    def _install_stable(self, cert: CheckpointCertificate) -> None:
        seq = cert.seq
        self.low_watermark = seq
        self.stable_cert = cert
        self.ledger.seal(seq)
        for old in [s for s in self.entries if s <= seq]:
            del self.entries[old]
        for table in (self._own_checkpoints, self._snapshots, self._deferred):
            for old in [s for s in table if s <= seq]:
                del table[old]
        for key in [k for k in self._early if k[1] <= seq]:
            del self._early[key]
        for key in [k for k in self._mac_supports if k[1] <= seq]:
            del self._mac_supports[key]
        self._checkpoints.collect_garbage(seq)
        self._record(STABLE_CHECKPOINT, view=self.view, seq=seq, digest=cert.state_digest)

    def _release_deferred(self) -> list[Send]:
        out: list[Send] = []
        limit = self.low_watermark + self.config.watermark_window
        for seq in sorted(self._deferred):
            if seq > limit:
                break
            sender, m = self._deferred.pop(seq)
            out.extend(self.on_message(sender, m))
        return out

    # === State transfer ===

    def request_state_transfer(self, cert: CheckpointCertificate) -> list[Send]:
        if self._transfer is not None and self._transfer.seq >= cert.seq:
            return []
        if cert.seq <= self.low_watermark:
            return []
        self._transfer = cert
        self._transfer_attempt = 0
        self._log.info("requesting state transfer", seq=cert.seq)
        return self._send_state_request()

    def _send_state_request(self) -> list[Send]:
        cert = self._transfer
        assert cert is not None
        candidates = [s for s in cert.signers if s != self.id]
        if not candidates:
            return []
        target = candidates[self._transfer_attempt % len(candidates)]
        self._arm(("state_transfer", cert.seq), 2 * self.config.timeout_base)
        return [Send(replica_addr(target), StateRequestMsg(seq=cert.seq))]

    def _on_transfer_timeout(self, seq: int) -> list[Send]:
        if self._transfer is None or self._transfer.seq != seq:
            return []
        self._transfer_attempt += 1
        return self._send_state_request()

    def on_state_request(self, sender: str, m: StateRequestMsg) -> list[Send]:
        if self._serving is None or self._serving.certificate.seq < m.seq:
            return []
        if self._sender_replica(sender) is None:
            return []
        return [Send(sender, self._serving)]

    def on_state_reply(self, sender: str, m: StateReplyMsg) -> list[Send]:
        cert = m.certificate
        if (
            self._transfer is None
            or cert.seq < self._transfer.seq
            or cert.seq <= self.low_watermark
        ):
            return []
        if not certificate_valid(self._auth, cert, self.config.nf, self.config.checkpoint_interval):
            raise ProtocolError(f"invalid checkpoint certificate from {sender}")
        if not state_reply_valid(self._auth, m, self.ledger.genesis):
            raise ProtocolError(f"state reply from {sender} does not match its certificate")

        self._cancel(("state_transfer", self._transfer.seq))
        self._transfer = None
        self.store.install(m.snapshot)
        self.ledger.install(m.blocks)
        for entry in self.entries.values():
            if entry.status is Status.EXECUTED:
                entry.status = Status.VIEW_COMMITTED
                entry.undo = None
                entry.results = None
                entry.request_keys = ()
        self._serving = m
        self._install_stable(cert)
        if self._lagging is not None and self._lagging.seq <= cert.seq:
            self._lagging = None
            self._cancel(LAGGING_TIMER)
        for key in [k for k in self._pending if self.store.lookup(*k) is not None]:
            self._settle_request(key)
        self._in_flight = {k for k in self._in_flight if self.store.lookup(*k) is None}
        if self.is_primary:
            self._next_seq = max(self._next_seq, cert.seq + 1)
        self._record(
            STATE_TRANSFER,
            view=self.view,
            seq=cert.seq,
            digest=cert.state_digest,
            aux_digest=self.ledger.tip_hash,
        )
        self._log.info("state transfer installed", seq=cert.seq, source=sender)
        return [*self.try_execute(), *self._release_deferred(), *self._maybe_propose()]
