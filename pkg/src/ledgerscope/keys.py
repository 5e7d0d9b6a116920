"""Ed25519 signing for committee members.

Verification is deterministic and keys serialize as raw 32-byte values,
which is all the commitment protocol needs. Member keys can be derived
from a seed so simulation runs reproduce identical signatures.
"""

from __future__ import annotations

import hashlib

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)


class SigningKey:
    def __init__(self, private: Ed25519PrivateKey):
        self._private = private

    @classmethod
    def from_seed(cls, seed: bytes, member_id: str) -> SigningKey:
        material = hashlib.sha256(seed + b"|member-key|" + member_id.encode()).digest()
        return cls(Ed25519PrivateKey.from_private_bytes(material))

    @classmethod
    def generate(cls) -> SigningKey:
        return cls(Ed25519PrivateKey.generate())

    def sign(self, message: bytes) -> bytes:
        return self._private.sign(message)

    def public_bytes(self) -> bytes:
        return self._private.public_key().public_bytes_raw()


def verify_signature(public_key: bytes, message: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False
