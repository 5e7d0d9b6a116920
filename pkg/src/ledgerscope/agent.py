"""Committee agent: folds block write-sets into the accumulator digest and
maintains the rolling hash over digest history.

Only the latest version of each key stays in the accumulator, so the
digest is a function of the current ledger state; superseded versions
remain answerable through per-height snapshots and key epochs. The
rolling hash advances once per block as hash(previous rolling hash ||
previous digest in canonical hex).
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

from .accumulator import (
    AccumulatorParams,
    AccumulatorState,
    PrimeRepresentation,
    Trapdoor,
    Witness,
    witness_from_digest,
)
from .codec import KVWrite, encode_write, int_to_hex
from .keys import SigningKey
from .ledger import Block, LedgerState, genesis_block_writes, transaction_applies

logger = logging.getLogger(__name__)


def rolling_hash_step(prev_hash: bytes, prev_digest: int) -> bytes:
    """Next rolling-hash link: SHA-256(previous hash || previous digest hex)."""
    return hashlib.sha256(prev_hash + int_to_hex(prev_digest).encode()).digest()


def initial_rolling_hash(chain_id: str) -> bytes:
    return hashlib.sha256(chain_id.encode()).digest()


@dataclass
class KeyEpoch:
    """Lifetime of one key version: live from ``start`` until ``end`` (inclusive)."""

    write: KVWrite
    rep: PrimeRepresentation
    start: int
    end: int | None = None

    def live_at(self, height: int) -> bool:
        return self.start <= height and (self.end is None or height <= self.end)


@dataclass
class Agent:
    """Single-writer digest maintainer for one committee member."""

    member_id: str
    signing_key: SigningKey
    accumulator: AccumulatorState
    chain_id: str
    rolling_hash: bytes = b""
    height: int = 0
    history: dict[int, tuple[int, bytes]] = field(default_factory=dict)
    key_epochs: dict[bytes, list[KeyEpoch]] = field(default_factory=dict)
    history_limit: int | None = None

    @classmethod
    def bootstrap(
        cls,
        member_id: str,
        signing_key: SigningKey,
        params: AccumulatorParams,
        trapdoor: Trapdoor | None,
        genesis: LedgerState,
        chain_id: str,
    ) -> Agent:
        """Agent at height 0 with the genesis committee/policy entries folded in."""
        agent = cls(
            member_id=member_id,
            signing_key=signing_key,
            accumulator=AccumulatorState(params=params, trapdoor=trapdoor),
            chain_id=chain_id,
            rolling_hash=initial_rolling_hash(chain_id),
        )
        members = {m: genesis.member_key(m) or b"" for m in genesis.committee}
        for write in genesis_block_writes(members, genesis.policy):
            agent._apply_write(write, height=0)
        agent.history[0] = (agent.accumulator.digest, agent.rolling_hash)
        return agent

    @property
    def params(self) -> AccumulatorParams:
        return self.accumulator.params

    def fold_block(self, block: Block) -> Agent:
        """Advance one block: fold applicable writes, step the rolling hash."""
        if block.height != self.height + 1:
            raise ValueError(
                f"agent at height {self.height} cannot fold block {block.height}"
            )
        prev_digest = self.accumulator.digest
        prev_hash = self.rolling_hash
        for tx in block.transactions:
            if not transaction_applies(tx):
                continue
            for write in tx.writes:
                self._apply_write(write, height=block.height)
        self.height = block.height
        self.rolling_hash = rolling_hash_step(prev_hash, prev_digest)
        self.history[self.height] = (self.accumulator.digest, self.rolling_hash)
        if self.history_limit is not None:
            for h in [h for h in self.history if h < self.height - self.history_limit]:
                del self.history[h]
        return self

    def _apply_write(self, write: KVWrite, height: int) -> None:
        epochs = self.key_epochs.setdefault(write.key, [])
        live = epochs[-1] if epochs and epochs[-1].end is None else None
        if write.is_delete:
            if live is None:
                logger.warning(
                    "delete of key %r at height %d with nothing accumulated", write.key, height
                )
                return
            self.accumulator.delete(encode_write(live.write))
            live.end = height - 1
            return
        if live is not None:
            # Only the current version stays accumulated: swap old for new.
            self.accumulator.delete(encode_write(live.write))
            live.end = height - 1
        element = encode_write(write)
        rep = self.accumulator.representation_for(element)
        self.accumulator.add(element, rep)
        epochs.append(KeyEpoch(write=write, rep=rep, start=height))

    def snapshot(self, height: int) -> tuple[int, bytes]:
        """(digest, rolling hash) recorded at a height."""
        if height not in self.history:
            raise KeyError(f"no snapshot at height {height}")
        return self.history[height]

    def live_epoch(self, key: bytes, height: int) -> KeyEpoch | None:
        for epoch in self.key_epochs.get(key, ()):
            if epoch.live_at(height):
                return epoch
        return None

    def elements_at(self, height: int) -> dict[bytes, PrimeRepresentation]:
        """Accumulated element set at a historical height, from key epochs."""
        out: dict[bytes, PrimeRepresentation] = {}
        for epochs in self.key_epochs.values():
            for epoch in epochs:
                if epoch.live_at(height):
                    out[encode_write(epoch.write)] = epoch.rep
        return out

    def witness_at(self, height: int, rep: PrimeRepresentation) -> Witness:
        """Fresh membership witness against the snapshot digest at ``height``."""
        if self.accumulator.trapdoor is None:
            raise PermissionError("witness generation requires the trapdoor")
        digest, _ = self.snapshot(height)
        return Witness(
            value=witness_from_digest(self.params, self.accumulator.trapdoor, digest, rep.prime),
            subject=rep,
            digest=digest,
        )

    def dump_snapshots(self) -> str:
        """Flat snapshot table: height, digest hex, rolling-hash hex."""
        lines = ["height\tdigest_hex\trolling_hash_hex"]
        for h in sorted(self.history):
            digest, rolling = self.history[h]
            lines.append(f"{h}\t{int_to_hex(digest)}\t{rolling.hex()}")
        return "\n".join(lines) + "\n"
