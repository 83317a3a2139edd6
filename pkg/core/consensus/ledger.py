"""Hash-chained ledger of executed batches.

Each block is {k, d, v, prev_hash} plus the certify proof of entry k. The
chain hash covers the header only; the proof is verified on its own, so
replicas holding different valid proofs for the same entry still agree on
every chain hash. The genesis hash is derived from the initial primary's
identity.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from core.consensus.codec import block_header_hash, decode, encode
from core.consensus.messages import Block, CertifyMsg
from core.domain.errors import (
    InvalidProof,
    MalformedMessage,
    OutOfOrderAppend,
    TruncateBelowCheckpoint,
)
from core.domain.interfaces import Authenticator
from core.domain.types import Digest, replica_addr
from core.infrastructure.crypto.hashing import hash_bytes, proposal_digest


def genesis_hash(initial_primary: int = 0) -> Digest:
    return hash_bytes(b"genesis|" + replica_addr(initial_primary).encode("ascii"))


def proof_valid(auth: Authenticator, block: Block) -> bool:
    proof = block.proof
    if proof.seq != block.seq or proof.view != block.view:
        return False
    return auth.verify_threshold(proof.ts, proposal_digest(block.seq, block.view, block.digest))


def chain_valid(auth: Authenticator, blocks: Sequence[Block], genesis: Digest) -> bool:
    prev = genesis
    for index, block in enumerate(blocks):
        if block.seq != index or block.prev_hash != prev or not proof_valid(auth, block):
            return False
        prev = block_header_hash(block)
    return True


class Ledger:
    def __init__(self, auth: Authenticator, initial_primary: int = 0) -> None:
        self._auth = auth
        self.genesis = genesis_hash(initial_primary)
        self.blocks: list[Block] = []
        self._hashes: list[Digest] = []
        self.sealed_seq = -1

    @property
    def tip_seq(self) -> int:
        return len(self.blocks) - 1

    @property
    def tip_hash(self) -> Digest:
        return self._hashes[-1] if self._hashes else self.genesis

    def hash_at(self, seq: int) -> Digest:
        if seq < 0:
            return self.genesis
        return self._hashes[seq]

    def append_block(self, seq: int, view: int, digest: Digest, proof: CertifyMsg) -> Block:
        """Append the executed entry `seq`.

        Raises:
            OutOfOrderAppend: `seq` does not extend the tip.
            InvalidProof: the certify proof does not verify for (seq, view, digest).
        """
        if seq != self.tip_seq + 1:
            raise OutOfOrderAppend(f"append {seq} over tip {self.tip_seq}")
        block = Block(seq=seq, view=view, digest=digest, prev_hash=self.tip_hash, proof=proof)
        if not proof_valid(self._auth, block):
            raise InvalidProof(f"certify proof does not verify for seq {seq}")
        self.blocks.append(block)
        self._hashes.append(block_header_hash(block))
        return block

    def truncate(self, to_seq: int) -> None:
        if to_seq < self.sealed_seq:
            raise TruncateBelowCheckpoint(
                f"truncate to {to_seq} below stable checkpoint {self.sealed_seq}"
            )
        del self.blocks[to_seq + 1 :]
        del self._hashes[to_seq + 1 :]

    def seal(self, seq: int) -> None:
        self.sealed_seq = max(self.sealed_seq, seq)

    def verify_chain(self) -> bool:
        return chain_valid(self._auth, self.blocks, self.genesis)

    def install(self, blocks: Sequence[Block]) -> None:
        """Replace the chain with verified `blocks` and seal at their tip."""
        if not chain_valid(self._auth, blocks, self.genesis):
            raise InvalidProof("transferred chain does not verify")
        self.blocks = list(blocks)
        self._hashes = [block_header_hash(b) for b in self.blocks]
        self.sealed_seq = self.tip_seq

    def export_lines(self) -> list[str]:
        return [encode(block).hex() for block in self.blocks]


def parse_lines(lines: Iterable[str]) -> list[Block]:
    blocks: list[Block] = []
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            block = decode(bytes.fromhex(line))
        except ValueError as exc:
            raise MalformedMessage(f"line {number}: {exc}") from exc
        if not isinstance(block, Block):
            raise MalformedMessage(f"line {number}: expected a block")
        blocks.append(block)
    return blocks


@dataclass(frozen=True, slots=True)
class LedgerDiff:
    length_a: int
    length_b: int
    first_divergence: int | None

    @property
    def identical(self) -> bool:
        return self.first_divergence is None and self.length_a == self.length_b

    @property
    def prefix_consistent(self) -> bool:
        return self.first_divergence is None


def diff_ledgers(a: Sequence[Block], b: Sequence[Block]) -> LedgerDiff:
    """First sequence number at which two exported ledgers disagree."""
    for index, (x, y) in enumerate(zip(a, b)):
        if block_header_hash(x) != block_header_hash(y):
            return LedgerDiff(len(a), len(b), x.seq if x.seq == y.seq else index)
    return LedgerDiff(len(a), len(b), None)
