"""Deterministic bulletin board: commitment recording, conflict detection,
endorsement tracking, and the board block clock.

The board is an append-only state machine with a single logical writer.
Every accepted mutation advances the block clock by exactly one, which
gives external clients a deterministic notion of publication time. The
first submission at a height establishes the reference commitment; later
submissions must match it exactly or they are routed into conflict
reporting. Cross-round rolling-hash validation is not computable from
board-visible data alone, so it arrives as conflict reports from agents
who hold full digest history.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

from .codec import hex_to_int, int_to_hex
from .keys import verify_signature
from .ledger import Policy
from .proofs import View, commitment_payload, conflict_payload

VIEW_PUBLISHED = "ViewPublished"
VIEW_COMMITMENT_CONFLICT = "ViewCommitmentConflict"


class BulletinError(Exception):
    pass


class UnauthorizedSubmission(BulletinError):
    """Submission rejected before any state change."""


class CommitmentStatus(str, Enum):
    ACCEPTED = "ACCEPTED"
    DISPUTED = "DISPUTED"


@dataclass
class Commitment:
    view: View
    rolling_hash: bytes
    submitter: str
    board_block: int
    status: CommitmentStatus = CommitmentStatus.ACCEPTED


@dataclass(frozen=True)
class ConflictReport:
    height: int
    reference: tuple[View, bytes] | None
    conflicting: tuple[View, bytes]
    reporter: str
    board_block: int


@dataclass(frozen=True)
class BoardEvent:
    board_block: int
    type: str
    height: int
    member: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "board_block": self.board_block,
            "type": self.type,
            "height": self.height,
            "member": self.member,
            "payload": self.payload,
        }


class ChainIndex(Protocol):
    """Oracle answering whether a later submission's rolling hash chains
    over the reference commitment at an earlier height."""

    def endorses(
        self,
        member: str,
        submit_height: int,
        submitted_hash: bytes,
        target_height: int,
        reference_digest: int,
        reference_hash: bytes,
    ) -> bool: ...


@dataclass
class HeightRecord:
    reference: Commitment
    votes: dict[str, tuple[View, bytes]] = field(default_factory=dict)

    @property
    def status(self) -> CommitmentStatus:
        return self.reference.status


@dataclass
class Board:
    committee_registry: dict[str, bytes]
    policy: Policy
    commitments: dict[int, HeightRecord] = field(default_factory=dict)
    conflict_log: list[ConflictReport] = field(default_factory=list)
    event_log: list[BoardEvent] = field(default_factory=list)
    block_clock: int = 0
    chain_index: ChainIndex | None = None

    def _tick(self) -> int:
        self.block_clock += 1
        return self.block_clock

    def _emit(self, event: BoardEvent) -> BoardEvent:
        self.event_log.append(event)
        return event

    def _authorize(self, member: str, payload: bytes, signature: bytes) -> None:
        public_key = self.committee_registry.get(member)
        if public_key is None:
            raise UnauthorizedSubmission(f"{member} is not a registered committee member")
        if not verify_signature(public_key, payload, signature):
            raise UnauthorizedSubmission(f"bad signature from {member}")

    # Mutations ---------------------------------------------------------------

    def publish_view(
        self,
        height: int,
        member: str,
        view: View,
        rolling_hash: bytes,
        signature: bytes,
    ) -> list[BoardEvent]:
        """Record a commitment submission, or route a mismatch into conflict
        reporting. Returns the events emitted by this call."""
        self._authorize(
            member, commitment_payload(view.digest, height, rolling_hash), signature
        )
        if view.signer != member or view.height != height:
            raise UnauthorizedSubmission("view signer/height does not match submission")
        record = self.commitments.get(height)
        if record is not None:
            if (
                view.digest != record.reference.view.digest
                or rolling_hash != record.reference.rolling_hash
            ):
                return self._record_conflict(height, member, view, rolling_hash)
            if member in record.votes:
                return []  # idempotent re-submission
            record.votes[member] = (view, rolling_hash)
            block = self._tick()
            return [
                self._emit(
                    BoardEvent(
                        board_block=block,
                        type=VIEW_PUBLISHED,
                        height=height,
                        member=member,
                        payload={"z_hex": int_to_hex(view.digest)},
                    )
                )
            ]
        block = self._tick()
        commitment = Commitment(
            view=view, rolling_hash=rolling_hash, submitter=member, board_block=block
        )
        self.commitments[height] = HeightRecord(
            reference=commitment, votes={member: (view, rolling_hash)}
        )
        return [
            self._emit(
                BoardEvent(
                    board_block=block,
                    type=VIEW_PUBLISHED,
                    height=height,
                    member=member,
                    payload={"z_hex": int_to_hex(view.digest)},
                )
            )
        ]

    def report_view_conflict(
        self,
        height: int,
        member: str,
        view: View,
        rolling_hash: bytes,
        signature: bytes,
    ) -> list[BoardEvent]:
        """File a conflict observation against the recorded reference."""
        self._authorize(
            member, conflict_payload(view.digest, height, rolling_hash), signature
        )
        return self._record_conflict(height, member, view, rolling_hash)

    def _record_conflict(
        self, height: int, reporter: str, view: View, rolling_hash: bytes
    ) -> list[BoardEvent]:
        record = self.commitments.get(height)
        if record is None:
            # Off-board equivocation seen by an observer: logged as a
            # standalone alert, nothing to dispute yet.
            block = self._tick()
            self.conflict_log.append(
                ConflictReport(
                    height=height,
                    reference=None,
                    conflicting=(view, rolling_hash),
                    reporter=reporter,
                    board_block=block,
                )
            )
            return [
                self._emit(
                    BoardEvent(
                        board_block=block,
                        type=VIEW_COMMITMENT_CONFLICT,
                        height=height,
                        member=reporter,
                        payload={
                            "reference": None,
                            "conflicting_z_hex": int_to_hex(view.digest),
                            "conflicting_h_hex": rolling_hash.hex(),
                        },
                    )
                )
            ]
        ref = record.reference
        if view.digest == ref.view.digest and rolling_hash == ref.rolling_hash:
            return []  # report matches the reference: nothing to dispute
        ref.status = CommitmentStatus.DISPUTED
        block = self._tick()
        self.conflict_log.append(
            ConflictReport(
                height=height,
                reference=(ref.view, ref.rolling_hash),
                conflicting=(view, rolling_hash),
                reporter=reporter,
                board_block=block,
            )
        )
        return [
            self._emit(
                BoardEvent(
                    board_block=block,
                    type=VIEW_COMMITMENT_CONFLICT,
                    height=height,
                    member=reporter,
                    payload={
                        "reference": {
                            "z_hex": int_to_hex(ref.view.digest),
                            "h_hex": ref.rolling_hash.hex(),
                            "submitter": ref.submitter,
                        },
                        "conflicting_z_hex": int_to_hex(view.digest),
                        "conflicting_h_hex": rolling_hash.hex(),
                    },
                )
            )
        ]

    # Reads -------------------------------------------------------------------

    def get_commitment_for(self, height: int) -> Commitment | None:
        record = self.commitments.get(height)
        return record.reference if record else None

    def endorsements(self, height: int) -> tuple[set[str], set[str]]:
        """(explicit, implicit) endorser sets for the reference at a height.

        Explicit endorsers submitted a matching commitment at the height
        itself. Implicit endorsers published later with a rolling hash
        that chains over this reference, as judged by the chain index;
        with no chain index attached, implicit endorsement is unknown
        and reported empty.
        """
        record = self.commitments.get(height)
        if record is None:
            return set(), set()
        explicit = set(record.votes)
        implicit: set[str] = set()
        if self.chain_index is not None:
            ref = record.reference
            for later_height in sorted(self.commitments):
                if later_height <= height:
                    continue
                for member, (_, submitted_hash) in self.commitments[later_height].votes.items():
                    if member in explicit or member in implicit:
                        continue
                    if self.chain_index.endorses(
                        member,
                        later_height,
                        submitted_hash,
                        height,
                        ref.view.digest,
                        ref.rolling_hash,
                    ):
                        implicit.add(member)
        return explicit, implicit

    def implicated_members(self, height: int) -> set[str]:
        """Members whose submissions endorse a disputed reference."""
        record = self.commitments.get(height)
        if record is None or record.status != CommitmentStatus.DISPUTED:
            return set()
        explicit, implicit = self.endorsements(height)
        return explicit | implicit

    def safe_views(self, collusion_bound: int) -> list[Commitment]:
        """Commitments an external client may trust assuming at most
        ``collusion_bound`` colluding members: undisputed references with
        at least collusion_bound + 1 distinct endorsements."""
        if collusion_bound < 0:
            raise ValueError("collusion bound must be non-negative")
        out: list[Commitment] = []
        for height in sorted(self.commitments):
            record = self.commitments[height]
            if record.status != CommitmentStatus.ACCEPTED:
                continue
            explicit, implicit = self.endorsements(height)
            if len(explicit | implicit) >= collusion_bound + 1:
                out.append(record.reference)
        return out

    def published_sequence(self) -> list[tuple[View, int]]:
        """(view, board block) pairs for every reference, in clock order."""
        refs = [r.reference for r in self.commitments.values()]
        refs.sort(key=lambda c: c.board_block)
        return [(c.view, c.board_block) for c in refs]

    def block_clock_map(self) -> dict[int, int]:
        """Height -> board block of the reference commitment."""
        return {h: r.reference.board_block for h, r in sorted(self.commitments.items())}

    def query_events(
        self,
        type: str | None = None,
        height: int | None = None,
        member: str | None = None,
        since_block: int = 0,
    ) -> list[BoardEvent]:
        return [
            e
            for e in self.event_log
            if e.board_block >= since_block
            and (type is None or e.type == type)
            and (height is None or e.height == height)
            and (member is None or e.member == member)
        ]


def register_committee(
    members: list[tuple[str, bytes]], policy: Policy, chain_index: ChainIndex | None = None
) -> Board:
    """Bootstrap a board with the committee's public keys."""
    if not members:
        raise BulletinError("committee must be non-empty")
    registry: dict[str, bytes] = {}
    for member_id, public_key in members:
        if member_id in registry:
            raise BulletinError(f"duplicate committee member {member_id}")
        registry[member_id] = public_key
    return Board(committee_registry=dict(sorted(registry.items())), policy=policy,
                 chain_index=chain_index)


# Operation log ----------------------------------------------------------------


def view_to_dict(view: View) -> dict:
    return {
        "z_hex": int_to_hex(view.digest),
        "height": view.height,
        "sig_b64": base64.b64encode(view.signature).decode(),
        "signer": view.signer,
    }


def view_from_dict(data: dict) -> View:
    return View(
        digest=hex_to_int(data["z_hex"]),
        height=int(data["height"]),
        signature=base64.b64decode(data["sig_b64"]),
        signer=data["signer"],
    )


@dataclass
class BoardLog:
    """Append-only operation log; replaying it reconstructs the board."""

    records: list[dict] = field(default_factory=list)

    def record_register(self, members: list[tuple[str, bytes]], policy: Policy) -> None:
        self.records.append(
            {
                "op": "register",
                "members": {m: base64.b64encode(k).decode() for m, k in members},
                "policy": policy.to_dict(),
            }
        )

    def record_publish(
        self, height: int, member: str, view: View, rolling_hash: bytes, signature: bytes
    ) -> None:
        self.records.append(
            {
                "op": "publish",
                "height": height,
                "member": member,
                "view": view_to_dict(view),
                "rolling_hash_hex": rolling_hash.hex(),
                "sig_b64": base64.b64encode(signature).decode(),
            }
        )

    def record_report(
        self, height: int, member: str, view: View, rolling_hash: bytes, signature: bytes
    ) -> None:
        record = {
            "op": "report",
            "height": height,
            "member": member,
            "view": view_to_dict(view),
            "rolling_hash_hex": rolling_hash.hex(),
            "sig_b64": base64.b64encode(signature).decode(),
        }
        self.records.append(record)

    def dump(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    @classmethod
    def load(cls, text: str) -> BoardLog:
        return cls(records=[json.loads(line) for line in text.splitlines() if line.strip()])

    def replay(self, chain_index: ChainIndex | None = None) -> Board:
        board: Board | None = None
        for record in self.records:
            if record["op"] == "register":
                members = [
                    (m, base64.b64decode(k)) for m, k in sorted(record["members"].items())
                ]
                board = register_committee(
                    members, Policy.from_dict(record["policy"]), chain_index
                )
                continue
            if board is None:
                raise BulletinError("operation log does not start with registration")
            view = view_from_dict(record["view"])
            rolling_hash = bytes.fromhex(record["rolling_hash_hex"])
            signature = base64.b64decode(record["sig_b64"])
            if record["op"] == "publish":
                board.publish_view(record["height"], record["member"], view, rolling_hash, signature)
            elif record["op"] == "report":
                board.report_view_conflict(
                    record["height"], record["member"], view, rolling_hash, signature
                )
            else:
                raise BulletinError(f"unknown op {record['op']}")
        if board is None:
            raise BulletinError("empty operation log")
        return board
