"""Byzantine behaviour programs.

Faulty replicas run the honest state machine; an adversary program rewrites
what they send (`outbound`), observes what they receive (`inbound`, which
may inject extra messages), adds link delay, or crashes them. Every program
controls at most f replicas.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from core.consensus.codec import make_batch
from core.consensus.messages import (
    Batch,
    CertifyMsg,
    CheckpointMsg,
    ProposeMsg,
    SupportMsg,
    VcRequestMsg,
)
from core.domain.auth import SignatureShare, ThresholdSignature
from core.domain.errors import ConfigInvalid, CryptoError
from core.domain.interfaces import Authenticator
from core.domain.types import Scheme, parse_addr, replica_addr
from core.infrastructure.crypto.hashing import proposal_digest
from core.simulation.scenario import AdversarySpec


@dataclass(frozen=True, slots=True)
class Outgoing:
    """One message leaving a faulty replica; `claimed` spoofs the sender."""

    dest: str
    msg: Any
    claimed: str | None = None
    extra_delay: float = 0.0


@dataclass(slots=True)
class AdversaryContext:
    n: int
    f: int
    scheme: Scheme
    auth: Authenticator
    rng: np.random.Generator

    @property
    def nf(self) -> int:
        return self.n - self.f


def _dest_replica(dest: str) -> int | None:
    kind, ident = parse_addr(dest)
    return ident if kind == "r" else None


class Adversary:
    """No Byzantine behaviour."""

    program = "none"

    def __init__(self, faulty: tuple[int, ...] = ()) -> None:
        self.faulty = frozenset(faulty)
        self.ctx: AdversaryContext | None = None

    def bind(self, ctx: AdversaryContext) -> None:
        self.ctx = ctx

    def crashed(self, replica: int, now: float) -> bool:
        return False

    def outbound(self, src: int, dest: str, msg: Any, now: float) -> list[Outgoing]:
        return [Outgoing(dest, msg)]

    def inbound(self, dst: int, sender: str, msg: Any, now: float) -> list[Outgoing]:
        return []

    def link_delay(self, src: int, dest: str) -> float:
        return 0.0


class Crash(Adversary):
    """Victims stop at `at_time`: they neither send, receive nor fire timers."""

    program = "crash"

    def __init__(self, at_time: float = 50.0, victims: tuple[int, ...] = (0,)) -> None:
        super().__init__(victims)
        self.at_time = at_time

    def crashed(self, replica: int, now: float) -> bool:
        return replica in self.faulty and now >= self.at_time


class EquivocatingPrimary(Adversary):
    """The primary proposes batch b to one group and b' to `group_b`.

    b' re-lists the first request so its digest differs while every client
    signature stays valid. Supports for b' that reach the primary are
    aggregated (with the primary's own share) and certified to group B; in
    the MAC scheme the primary's support to group B is rewritten to b'.
    """

    program = "equivocating-primary"

    def __init__(self, primary: int = 0, group_b: tuple[int, ...] | None = None) -> None:
        super().__init__((primary,))
        self.primary = primary
        self.group_b = group_b
        self._alternates: dict[tuple[int, int], Batch] = {}
        self._shares: dict[tuple[int, int], dict[int, SignatureShare]] = {}
        self._certified: set[tuple[int, int]] = set()

    def bind(self, ctx: AdversaryContext) -> None:
        super().bind(ctx)
        if self.group_b is None:
            honest = [i for i in range(ctx.n) if i != self.primary]
            self.group_b = tuple(honest[len(honest) // 2 :])

    def _in_group_b(self, dest: str) -> bool:
        replica = _dest_replica(dest)
        return replica is not None and replica in (self.group_b or ())

    def _alternate(self, view: int, seq: int, batch: Batch) -> Batch:
        key = (view, seq)
        if key not in self._alternates:
            self._alternates[key] = make_batch(batch.requests + batch.requests[:1])
        return self._alternates[key]

    def _own_share(self, view: int, seq: int, batch: Batch) -> SignatureShare:
        assert self.ctx is not None
        h = proposal_digest(seq, view, batch.digest)
        return self.ctx.auth.sign_share(self.primary, h)

    def outbound(self, src: int, dest: str, msg: Any, now: float) -> list[Outgoing]:
        if src != self.primary or not self._in_group_b(dest):
            return [Outgoing(dest, msg)]
        if isinstance(msg, ProposeMsg):
            alt = self._alternate(msg.view, msg.seq, msg.batch)
            return [Outgoing(dest, ProposeMsg(view=msg.view, seq=msg.seq, batch=alt))]
        if isinstance(msg, SupportMsg) and (msg.view, msg.seq) in self._alternates:
            alt = self._alternates[(msg.view, msg.seq)]
            share = self._own_share(msg.view, msg.seq, alt)
            return [Outgoing(dest, SupportMsg(view=msg.view, seq=msg.seq, share=share))]
        if isinstance(msg, CertifyMsg) and (msg.view, msg.seq) in self._alternates:
            return []
        return [Outgoing(dest, msg)]

    def inbound(self, dst: int, sender: str, msg: Any, now: float) -> list[Outgoing]:
        assert self.ctx is not None
        if self.ctx.scheme is not Scheme.TS or not isinstance(msg, SupportMsg):
            return []
        key = (msg.view, msg.seq)
        alt = self._alternates.get(key)
        if alt is None or key in self._certified:
            return []
        own = self._own_share(msg.view, msg.seq, alt)
        if msg.share.digest != own.digest or not self.ctx.auth.verify_share(msg.share):
            return []
        shares = self._shares.setdefault(key, {self.primary: own})
        shares.setdefault(msg.share.signer, msg.share)
        if len(shares) < self.ctx.nf:
            return []
        try:
            ts = self.ctx.auth.aggregate(shares.values(), self.ctx.nf)
        except CryptoError:
            return []
        self._certified.add(key)
        certify = CertifyMsg(view=msg.view, seq=msg.seq, ts=ts)
        return [Outgoing(replica_addr(r), certify) for r in sorted(self.group_b or ())]


class DarkPrimary(Adversary):
    """The primary never sends proposals to `victims` (honest replicas)."""

    program = "dark-primary"

    def __init__(self, primary: int = 0, victims: tuple[int, ...] | None = None) -> None:
        super().__init__((primary,))
        self.primary = primary
        self.victims = victims

    def bind(self, ctx: AdversaryContext) -> None:
        super().bind(ctx)
        if self.victims is None:
            self.victims = (ctx.n - 1,)

    def outbound(self, src: int, dest: str, msg: Any, now: float) -> list[Outgoing]:
        if isinstance(msg, ProposeMsg) and _dest_replica(dest) in (self.victims or ()):
            return []
        return [Outgoing(dest, msg)]


class SkipSeq(Adversary):
    """The primary never proposes sequence number `seq` to anyone else."""

    program = "skip-seq"

    def __init__(self, seq: int = 3, primary: int = 0) -> None:
        super().__init__((primary,))
        self.primary = primary
        self.seq = seq

    def outbound(self, src: int, dest: str, msg: Any, now: float) -> list[Outgoing]:
        if isinstance(msg, ProposeMsg) and msg.seq == self.seq and dest != replica_addr(src):
            return []
        return [Outgoing(dest, msg)]


class DelayLinks(Adversary):
    """Outgoing links of `victims` get `extra` delay (optionally only towards `targets`)."""

    program = "delay-links"

    def __init__(
        self,
        extra: float = 5.0,
        victims: tuple[int, ...] = (0,),
        targets: tuple[int, ...] | None = None,
    ) -> None:
        super().__init__(victims)
        self.extra = extra
        self.targets = targets

    def link_delay(self, src: int, dest: str) -> float:
        if src not in self.faulty:
            return 0.0
        if self.targets is not None and _dest_replica(dest) not in self.targets:
            return 0.0
        return self.extra


class ForgeShares(Adversary):
    """Faulty replicas emit garbage authenticators and spoofed shares.

    Supports, checkpoints, vc-requests and certify messages leave with
    corrupted tags; each support is also followed by a copy claiming to
    come from another replica, which the link MAC exposes.
    """

    program = "forge-shares"

    def __init__(self, victims: tuple[int, ...] | None = None) -> None:
        super().__init__(victims or ())
        self._victims = victims

    def bind(self, ctx: AdversaryContext) -> None:
        super().bind(ctx)
        if self._victims is None:
            self.faulty = frozenset({ctx.n - 1})

    def _garbage(self, size: int = 32) -> bytes:
        assert self.ctx is not None
        return self.ctx.rng.bytes(size)

    def _forge(self, share: SignatureShare, signer: int | None = None) -> SignatureShare:
        return SignatureShare(
            signer=share.signer if signer is None else signer,
            digest=share.digest,
            tag=self._garbage(),
        )

    def outbound(self, src: int, dest: str, msg: Any, now: float) -> list[Outgoing]:
        assert self.ctx is not None
        if isinstance(msg, SupportMsg):
            victim = int(self.ctx.rng.integers(0, self.ctx.n))
            spoofed = SupportMsg(msg.view, msg.seq, self._forge(msg.share, victim))
            return [
                Outgoing(dest, SupportMsg(msg.view, msg.seq, self._forge(msg.share))),
                Outgoing(dest, spoofed, claimed=replica_addr(victim)),
            ]
        if isinstance(msg, CheckpointMsg):
            forged = CheckpointMsg(
                msg.seq, msg.state_digest, msg.ledger_digest, msg.signer, self._forge(msg.sig)
            )
            return [Outgoing(dest, forged)]
        if isinstance(msg, VcRequestMsg):
            forged = VcRequestMsg(
                msg.view, msg.history, msg.checkpoint, msg.signer, self._forge(msg.sig)
            )
            return [Outgoing(dest, forged)]
        if isinstance(msg, CertifyMsg):
            ts = ThresholdSignature(msg.ts.digest, msg.ts.contributors, self._garbage())
            return [Outgoing(dest, CertifyMsg(msg.view, msg.seq, ts))]
        return [Outgoing(dest, msg)]


PROGRAMS: dict[str, Callable[..., Adversary]] = {
    Adversary.program: Adversary,
    Crash.program: Crash,
    EquivocatingPrimary.program: EquivocatingPrimary,
    DarkPrimary.program: DarkPrimary,
    SkipSeq.program: SkipSeq,
    DelayLinks.program: DelayLinks,
    ForgeShares.program: ForgeShares,
}

CAMPAIGN_PROGRAMS = tuple(p for p in PROGRAMS if p != Adversary.program)

_TUPLE_PARAMS = {"victims", "group_b", "targets"}


def build_adversary(spec: AdversarySpec, n: int, f: int) -> Adversary:
    """Instantiate `spec` and check it controls at most f replicas.

    Raises:
        ConfigInvalid: unknown program, bad parameters or too many faulty replicas.
    """
    factory = PROGRAMS.get(spec.program)
    if factory is None:
        raise ConfigInvalid(
            f"unknown adversary program {spec.program!r}; expected one of {sorted(PROGRAMS)}"
        )
    params = {k: (tuple(v) if k in _TUPLE_PARAMS and v is not None else v) for k, v in spec.params}
    try:
        adversary = factory(**params)
    except TypeError as exc:
        raise ConfigInvalid(f"invalid parameters for {spec.program}: {exc}") from exc
    named = set(adversary.faulty)
    for attr in ("victims", "group_b", "targets"):
        value = params.get(attr)
        if value is not None and any(not 0 <= int(r) < n for r in value):
            raise ConfigInvalid(f"{spec.program}: {attr} names replicas outside 0..{n - 1}")
    if any(not 0 <= r < n for r in named):
        raise ConfigInvalid(f"{spec.program}: faulty replicas outside 0..{n - 1}")
    if isinstance(adversary, DarkPrimary) and adversary.victims is not None:
        if len(adversary.victims) > f or adversary.primary in adversary.victims:
            raise ConfigInvalid("dark-primary: victims must be at most f honest replicas")
    if spec.program == ForgeShares.program and params.get("victims") is None:
        named = {n - 1}
    if len(named) > f:
        raise ConfigInvalid(f"{spec.program} controls {len(named)} replicas but f={f}")
    return adversary
