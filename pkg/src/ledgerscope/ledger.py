"""Simulated permissioned ledger: blocks of key/value writes over a
replicated state machine.

A state is the triple (application entries, committee, policy). Committee
membership and policy live under reserved key prefixes so they are
ordinary provable entries of the state; the typed views on
:class:`LedgerState` are projections of those keys.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field, replace
from enum import Enum

from .codec import KVWrite

COMMITTEE_PREFIX = b"/committee/"
POLICY_PREFIX = b"/policy/"
TX_PREFIX = b"/tx/"


class PublishStrategy(str, Enum):
    ALL = "ALL"
    ROUND_ROBIN = "ROUND_ROBIN"
    RANDOM_SUBSET = "RANDOM_SUBSET"


@dataclass(frozen=True)
class Policy:
    """Publication policy: tolerated failures and round cadence."""

    failure_threshold: int
    round_interval: int
    publish_strategy: PublishStrategy
    subcommittee_size: int

    def __post_init__(self) -> None:
        if self.round_interval < 1:
            raise ValueError("round interval must be at least 1")
        if self.subcommittee_size < self.failure_threshold + 1:
            raise ValueError("subcommittee must exceed the failure threshold")

    def to_dict(self) -> dict:
        return {
            "failure_threshold": self.failure_threshold,
            "round_interval": self.round_interval,
            "publish_strategy": self.publish_strategy.value,
            "subcommittee_size": self.subcommittee_size,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Policy:
        return cls(
            failure_threshold=int(data["failure_threshold"]),
            round_interval=int(data["round_interval"]),
            publish_strategy=PublishStrategy(data["publish_strategy"]),
            subcommittee_size=int(data["subcommittee_size"]),
        )


@dataclass(frozen=True)
class Transaction:
    writes: tuple[KVWrite, ...]
    valid: bool = True

    def __post_init__(self) -> None:
        keys = [w.key for w in self.writes]
        if len(keys) != len(set(keys)):
            raise ValueError("writes within a transaction must touch distinct keys")


@dataclass(frozen=True)
class Block:
    height: int
    transactions: tuple[Transaction, ...]


@dataclass(frozen=True)
class LedgerState:
    """One state of the replicated machine; entries map key -> (value, version)."""

    app_state: dict[bytes, tuple[bytes, tuple[int, int]]]
    height: int

    @property
    def committee(self) -> set[str]:
        return {
            key[len(COMMITTEE_PREFIX) :].decode()
            for key in self.app_state
            if key.startswith(COMMITTEE_PREFIX)
        }

    @property
    def policy(self) -> Policy:
        def get(name: bytes, fallback: bytes) -> bytes:
            entry = self.app_state.get(POLICY_PREFIX + name)
            return entry[0] if entry else fallback

        return Policy(
            failure_threshold=int(get(b"failure_threshold", b"0")),
            round_interval=int(get(b"round_interval", b"1")),
            publish_strategy=PublishStrategy(get(b"publish_strategy", b"ALL").decode()),
            subcommittee_size=int(get(b"subcommittee_size", b"1")),
        )

    def member_key(self, member_id: str) -> bytes | None:
        entry = self.app_state.get(COMMITTEE_PREFIX + member_id.encode())
        return entry[0] if entry else None


def genesis_block_writes(
    members: dict[str, bytes], policy: Policy, height: int = 0
) -> list[KVWrite]:
    """Reserved-prefix writes that seed committee and policy entries."""
    writes: list[KVWrite] = []
    index = 0
    for member_id in sorted(members):
        writes.append(
            KVWrite(
                key=COMMITTEE_PREFIX + member_id.encode(),
                value=members[member_id],
                is_delete=False,
                version=(height, index),
            )
        )
        index += 1
    for name, value in sorted(policy.to_dict().items()):
        writes.append(
            KVWrite(
                key=POLICY_PREFIX + name.encode(),
                value=str(value if not isinstance(value, str) else value).encode(),
                is_delete=False,
                version=(height, index),
            )
        )
        index += 1
    return writes


def genesis_state(members: dict[str, bytes], policy: Policy) -> LedgerState:
    """State 0: committee and policy entries only, all at version (0, i)."""
    if not members:
        raise ValueError("committee must be non-empty")
    app_state = {
        w.key: (w.value, w.version) for w in genesis_block_writes(members, policy)
    }
    return LedgerState(app_state=app_state, height=0)


def transaction_applies(tx: Transaction) -> bool:
    """Shared validity predicate: flagged valid and every write well-formed."""
    return tx.valid and all(w.key for w in tx.writes)


def next_state(transactions: tuple[Transaction, ...], prev: LedgerState) -> LedgerState:
    """Apply one block of transactions; invalid transactions are skipped whole."""
    height = prev.height + 1
    app_state = dict(prev.app_state)
    for tx in transactions:
        if not transaction_applies(tx):
            continue
        for write in tx.writes:
            if write.version[0] != height:
                raise ValueError(
                    f"write versioned for height {write.version[0]} in block {height}"
                )
            if write.is_delete:
                app_state.pop(write.key, None)
            else:
                app_state[write.key] = (write.value, write.version)
    return LedgerState(app_state=app_state, height=height)


def verify_transition(
    transactions: tuple[Transaction, ...], prev: LedgerState, nxt: LedgerState
) -> bool:
    """True iff re-applying the transactions reproduces ``nxt`` field by field."""
    try:
        recomputed = next_state(transactions, prev)
    except ValueError:
        return False
    return recomputed.app_state == nxt.app_state and recomputed.height == nxt.height


def replay_is_valid(blocks: list[Block], genesis: LedgerState) -> bool:
    """Whole-ledger validity: every recorded transition verifies."""
    state = genesis
    for block in blocks:
        nxt = next_state(block.transactions, state)
        if not verify_transition(block.transactions, state, nxt):
            return False
        state = nxt
    return True


def block_to_record(block: Block) -> dict:
    return {
        "height": block.height,
        "transactions": [
            {
                "valid": tx.valid,
                "writes": [
                    {
                        "key_b64": base64.b64encode(w.key).decode(),
                        "value_b64": base64.b64encode(w.value).decode(),
                        "is_delete": w.is_delete,
                        "version": list(w.version),
                    }
                    for w in tx.writes
                ],
            }
            for tx in block.transactions
        ],
    }


def block_from_record(record: dict) -> Block:
    return Block(
        height=int(record["height"]),
        transactions=tuple(
            Transaction(
                writes=tuple(
                    KVWrite(
                        key=base64.b64decode(w["key_b64"]),
                        value=base64.b64decode(w["value_b64"]),
                        is_delete=bool(w["is_delete"]),
                        version=(int(w["version"][0]), int(w["version"][1])),
                    )
                    for w in tx["writes"]
                ),
                valid=bool(tx["valid"]),
            )
            for tx in record["transactions"]
        ),
    )


def dump_blocks(blocks: list[Block]) -> str:
    """Line-delimited block records, one JSON object per block."""
    return "".join(json.dumps(block_to_record(b), sort_keys=True) + "\n" for b in blocks)


def load_blocks(text: str) -> list[Block]:
    return [block_from_record(json.loads(line)) for line in text.splitlines() if line.strip()]
