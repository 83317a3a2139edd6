"""View-change validation and new-view history selection.

A vc-request for view v carries the sender's executed history above its
stable checkpoint. The next primary proposes the new view with nf such
requests; every replica then adopts the history reaching the highest
sequence number (lowest signer id on ties), so all replicas that adopt
the same proposal compute the same adopted history and k_max.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

from core.consensus.checkpoint import certificate_valid
from core.consensus.codec import batch_digest, vc_signing_digest
from core.consensus.messages import NvProposeMsg, VcRequestMsg
from core.domain.errors import InvalidNewView, NotPrimary
from core.domain.interfaces import Authenticator
from core.domain.types import ReplicaConfig, ReplicaId
from core.infrastructure.crypto.hashing import proposal_digest
from core.reliability.backoff import compute_backoff

REQUEST_TIMEOUT = "request-timeout"
PROGRESS_TIMEOUT = "progress-timeout"
JOIN_QUORUM = "join-quorum"
VIEW_CHANGE_TIMEOUT = "view-change-timeout"
INVALID_NEW_VIEW = "invalid-new-view"


@dataclass(slots=True)
class ViewChangeState:
    """Bookkeeping for in-progress view changes.

    `sent_for` is the highest view this replica has suspected; `attempts`
    counts consecutive view changes without adopting a new view.
    """

    attempts: int = 0
    sent_for: int = -1
    requests: dict[int, dict[ReplicaId, VcRequestMsg]] = field(default_factory=dict)
    nv_sent: set[int] = field(default_factory=set)

    def timeout(self, base: float, cap_exponent: int) -> float:
        return compute_backoff(base, self.attempts, cap_exponent)

    def received(self, view: int) -> dict[ReplicaId, VcRequestMsg]:
        return self.requests.setdefault(view, {})

    def forget_below(self, view: int) -> None:
        for stale in [v for v in self.requests if v < view]:
            del self.requests[stale]


def validate_vc_request(auth: Authenticator, m: VcRequestMsg, config: ReplicaConfig) -> bool:
    """True iff the signature holds and the history is consecutive and certified.

    The history must start right above the checkpoint certificate the
    request carries (seq 0 without one), and every entry's threshold
    signature must verify against H(k || w || d) for its own view w <= v.
    """
    sig = m.sig
    if sig.signer != m.signer or not 0 <= m.signer < config.n:
        return False
    if sig.digest != vc_signing_digest(m.view, m.history, m.checkpoint, m.signer):
        return False
    if not auth.verify_share(sig):
        return False
    if m.checkpoint is not None and not certificate_valid(
        auth, m.checkpoint, config.nf, config.checkpoint_interval
    ):
        return False
    expected = m.base_seq + 1
    for entry in m.history:
        certify = entry.certify
        if certify.seq != expected or certify.view > m.view:
            return False
        batch = entry.batch
        if not batch.requests or batch.digest != batch_digest(batch.requests):
            return False
        if not auth.verify_threshold(
            certify.ts, proposal_digest(certify.seq, certify.view, batch.digest)
        ):
            return False
        expected += 1
    return True


def select_history(proofs: Sequence[VcRequestMsg]) -> VcRequestMsg:
    """The request whose history reaches the highest seq; lowest signer on ties."""
    return min(proofs, key=lambda m: (-m.last_seq, m.signer))


def validate_nv_propose(
    auth: Authenticator, config: ReplicaConfig, sender: ReplicaId, m: NvProposeMsg
) -> VcRequestMsg:
    """Check an nv-propose and return the vc-request whose history is adopted.

    Raises:
        NotPrimary: `sender` is not the primary of the proposed view.
        InvalidNewView: wrong quorum size, repeated signers or an invalid
            embedded vc-request.
    """
    if sender != config.primary_of(m.new_view):
        raise NotPrimary(f"replica {sender} cannot propose view {m.new_view}")
    proofs = m.proofs
    if len(proofs) != config.nf:
        raise InvalidNewView(f"{len(proofs)} vc-requests, need exactly {config.nf}")
    if len({p.signer for p in proofs}) != len(proofs):
        raise InvalidNewView("vc-requests from repeated signers")
    for proof in proofs:
        if proof.view != m.new_view - 1:
            raise InvalidNewView(f"vc-request for view {proof.view}")
        if not validate_vc_request(auth, proof, config):
            raise InvalidNewView(f"invalid vc-request from replica {proof.signer}")
    return select_history(proofs)
