"""Fact assertions, signed views, and wrapped proofs for external clients.

An assertion proves a fact's membership in a digest; a view is a signed
(digest, height) pair released externally; a wrapped proof binds the two
so a client holding only the committee's public keys and parameters can
verify a fact with no access to the ledger.
"""

from __future__ import annotations

import base64
from collections.abc import Mapping
from dataclasses import dataclass
from enum import Enum

from .accumulator import (
    AccumulatorParams,
    PrimeRepresentation,
    verify_membership,
)
from .agent import Agent
from .codec import KVWrite, encode_write, hex_to_int, int_to_hex
from .keys import SigningKey, verify_signature
from .ledger import COMMITTEE_PREFIX, POLICY_PREFIX, TX_PREFIX


class ProofError(Exception):
    pass


class FactNotProvableError(ProofError):
    """The fact is not in the digest at the requested height."""

    def __init__(self, message: str, reason: str):
        super().__init__(message)
        self.reason = reason  # "absent" or "stale"


class NoViewError(ProofError):
    """No published view brackets the requested time."""


class FactKind(str, Enum):
    APPLICATION = "APPLICATION"
    TRANSACTION = "TRANSACTION"
    COMMITTEE = "COMMITTEE"
    POLICY = "POLICY"


def kind_for_key(key: bytes) -> FactKind:
    if key.startswith(COMMITTEE_PREFIX):
        return FactKind.COMMITTEE
    if key.startswith(POLICY_PREFIX):
        return FactKind.POLICY
    if key.startswith(TX_PREFIX):
        return FactKind.TRANSACTION
    return FactKind.APPLICATION


@dataclass(frozen=True)
class Fact:
    kind: FactKind
    key: bytes
    value: bytes
    version: tuple[int, int]

    def __post_init__(self) -> None:
        if kind_for_key(self.key) != self.kind:
            raise ValueError(f"kind {self.kind} inconsistent with key prefix {self.key!r}")

    def element(self) -> bytes:
        """The accumulated element this fact corresponds to."""
        return encode_write(
            KVWrite(key=self.key, value=self.value, is_delete=False, version=self.version)
        )


@dataclass(frozen=True)
class Assertion:
    """Membership proof of one fact against one digest."""

    witness_value: int
    rep: PrimeRepresentation
    digest: int
    height: int


@dataclass(frozen=True)
class View:
    """Signed external observation: (digest, height, signature, signer)."""

    digest: int
    height: int
    signature: bytes
    signer: str


@dataclass(frozen=True)
class WrappedProof:
    fact: Fact
    assertion: Assertion
    view: View


def view_payload(digest: int, height: int) -> bytes:
    return b"V|" + int_to_hex(digest).encode() + height.to_bytes(8, "big")


def commitment_payload(digest: int, height: int, rolling_hash: bytes) -> bytes:
    return b"C|" + int_to_hex(digest).encode() + height.to_bytes(8, "big") + rolling_hash


def conflict_payload(digest: int, height: int, rolling_hash: bytes) -> bytes:
    return b"R|" + int_to_hex(digest).encode() + height.to_bytes(8, "big") + rolling_hash


def generate_assertion(fact: Fact, agent: Agent, height: int) -> Assertion:
    """Prove a fact against the agent's digest at ``height``.

    Raises :class:`FactNotProvableError` when the key is absent at that
    height or present at a different version/value (stale queries must
    go through the historical lookup first).
    """
    epoch = agent.live_epoch(fact.key, height)
    if epoch is None:
        raise FactNotProvableError(
            f"key {fact.key!r} has no live version at height {height}", reason="absent"
        )
    if epoch.write.value != fact.value or epoch.write.version != fact.version:
        raise FactNotProvableError(
            f"fact for key {fact.key!r} does not match the version live at height {height}",
            reason="stale",
        )
    witness = agent.witness_at(height, epoch.rep)
    return Assertion(
        witness_value=witness.value, rep=epoch.rep, digest=witness.digest, height=height
    )


def verify_assertion(
    params: AccumulatorParams, fact: Fact, assertion: Assertion, digest: int
) -> bool:
    if assertion.digest != digest:
        return False
    return verify_membership(params, digest, fact.element(), assertion.rep, assertion.witness_value)


def generate_view(agent: Agent, height: int) -> View:
    digest, _ = agent.snapshot(height)
    signature = agent.signing_key.sign(view_payload(digest, height))
    return View(digest=digest, height=height, signature=signature, signer=agent.member_id)


def verify_view(digest: int, committee: Mapping[str, bytes], view: View) -> bool:
    """True iff the view matches the digest and carries a valid committee signature."""
    if view.digest != digest:
        return False
    public_key = committee.get(view.signer)
    if public_key is None:
        return False
    return verify_signature(public_key, view_payload(view.digest, view.height), view.signature)


def sign_view(signing_key: SigningKey, signer: str, digest: int, height: int) -> View:
    return View(
        digest=digest,
        height=height,
        signature=signing_key.sign(view_payload(digest, height)),
        signer=signer,
    )


def wrap_assertion(fact: Fact, assertion: Assertion, digest: int, view: View) -> WrappedProof:
    """Bind an assertion to a published view. The digests must already agree."""
    if assertion.digest != digest or view.digest != digest:
        raise ProofError("assertion, digest, and view disagree")
    if assertion.height != view.height:
        raise ProofError(
            f"assertion height {assertion.height} does not match view height {view.height}"
        )
    return WrappedProof(fact=fact, assertion=assertion, view=view)


def verify_wrapped(
    params: AccumulatorParams,
    committee: Mapping[str, bytes],
    fact: Fact,
    wrapped: WrappedProof,
    view: View,
) -> bool:
    """Client-side verification: no trapdoor, no ledger access.

    Checks the embedded view matches the presented one bit for bit, the
    signature comes from a registered member, and the membership proof
    (including hash binding and primality) holds against the view digest.
    """
    if wrapped.view != view:
        return False
    if not verify_view(view.digest, committee, view):
        return False
    if wrapped.fact != fact:
        return False
    return verify_assertion(params, fact, wrapped.assertion, view.digest)


def latest_fact_at(agent: Agent, key: bytes, view: View) -> Fact:
    """The key's version live at the view's height (historical lookup)."""
    epoch = agent.live_epoch(key, view.height)
    if epoch is None:
        raise FactNotProvableError(
            f"key {key!r} has no version live at height {view.height}", reason="absent"
        )
    return Fact(
        kind=kind_for_key(key),
        key=key,
        value=epoch.write.value,
        version=epoch.write.version,
    )


def bracket_view(published: list[tuple[View, int]], t: int) -> View:
    """Pick the view current at board time ``t``.

    ``published`` is ordered by board block; the chosen view is the one
    whose board block is the largest value <= t (the last bracket is
    open-ended).
    """
    chosen: View | None = None
    for view, board_block in published:
        if board_block <= t:
            chosen = view
        else:
            break
    if chosen is None:
        raise NoViewError(f"no view published at or before board block {t}")
    return chosen


def is_current(
    params: AccumulatorParams,
    fact: Fact,
    assertion: Assertion,
    t: int,
    published: list[tuple[View, int]],
) -> bool:
    """Currency check: the fact must verify against the bracketing view."""
    view = bracket_view(published, t)
    if assertion.height != view.height:
        return False
    return verify_assertion(params, fact, assertion, view.digest)


# Wire format -----------------------------------------------------------------


def wrapped_to_wire(wrapped: WrappedProof) -> dict:
    return {
        "fact": {
            "kind": wrapped.fact.kind.value,
            "key_b64": base64.b64encode(wrapped.fact.key).decode(),
            "value_b64": base64.b64encode(wrapped.fact.value).decode(),
            "version": list(wrapped.fact.version),
        },
        "prime": wrapped.assertion.rep.to_dict(),
        "witness_hex": int_to_hex(wrapped.assertion.witness_value),
        "view": {
            "z_hex": int_to_hex(wrapped.view.digest),
            "height": wrapped.view.height,
            "sig_b64": base64.b64encode(wrapped.view.signature).decode(),
            "signer": wrapped.view.signer,
        },
    }


def wrapped_from_wire(data: dict) -> WrappedProof:
    view = View(
        digest=hex_to_int(data["view"]["z_hex"]),
        height=int(data["view"]["height"]),
        signature=base64.b64decode(data["view"]["sig_b64"]),
        signer=data["view"]["signer"],
    )
    fact = Fact(
        kind=FactKind(data["fact"]["kind"]),
        key=base64.b64decode(data["fact"]["key_b64"]),
        value=base64.b64decode(data["fact"]["value_b64"]),
        version=(int(data["fact"]["version"][0]), int(data["fact"]["version"][1])),
    )
    assertion = Assertion(
        witness_value=hex_to_int(data["witness_hex"]),
        rep=PrimeRepresentation.from_dict(data["prime"]),
        digest=view.digest,
        height=view.height,
    )
    return WrappedProof(fact=fact, assertion=assertion, view=view)
