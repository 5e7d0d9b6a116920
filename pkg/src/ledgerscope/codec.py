"""Canonical byte encodings shared by every component.

Two encodings matter protocol-wide and must stay bit-stable:

* big integers as lowercase big-endian hex without leading zeros
  (``0`` encodes as ``"0"``) -- these strings feed the rolling hash,
  so any drift here silently forks agents;
* key/value writes as length-prefixed records -- these bytes are what
  gets hashed to a prime, so the encoding must be injective.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass


def int_to_hex(value: int) -> str:
    """Lowercase big-endian hex, no leading zeros; zero encodes as "0"."""
    if value < 0:
        raise ValueError("negative integers have no canonical encoding")
    return format(value, "x")


def hex_to_int(text: str) -> int:
    if text == "":
        raise ValueError("empty hex string")
    value = int(text, 16)
    if text != int_to_hex(value):
        raise ValueError(f"non-canonical hex encoding: {text!r}")
    return value


@dataclass(frozen=True)
class KVWrite:
    """One key/value mutation inside a transaction.

    ``version`` is (block_height, tx_index): the position at which the
    write was committed. Deletes carry an empty value.
    """

    key: bytes
    value: bytes
    is_delete: bool
    version: tuple[int, int]

    def __post_init__(self) -> None:
        if self.is_delete and self.value:
            raise ValueError("delete writes must carry an empty value")
        height, tx_index = self.version
        if height < 0 or tx_index < 0:
            raise ValueError("version components must be non-negative")


def encode_write(write: KVWrite) -> bytes:
    """Injective canonical encoding: this is the accumulated element."""
    if not write.key:
        raise ValueError("key must be non-empty")
    height, tx_index = write.version
    return b"".join(
        (
            struct.pack(">I", len(write.key)),
            write.key,
            struct.pack(">I", len(write.value)),
            write.value,
            struct.pack(">Q", height),
            struct.pack(">I", tx_index),
            struct.pack(">B", 1 if write.is_delete else 0),
        )
    )


def decode_write(data: bytes) -> KVWrite:
    """Inverse of :func:`encode_write`; rejects trailing garbage."""
    offset = 0

    def take(n: int) -> bytes:
        nonlocal offset
        if offset + n > len(data):
            raise ValueError("truncated write record")
        chunk = data[offset : offset + n]
        offset += n
        return chunk

    key_len = struct.unpack(">I", take(4))[0]
    key = take(key_len)
    value_len = struct.unpack(">I", take(4))[0]
    value = take(value_len)
    height = struct.unpack(">Q", take(8))[0]
    tx_index = struct.unpack(">I", take(4))[0]
    flag = struct.unpack(">B", take(1))[0]
    if flag not in (0, 1):
        raise ValueError(f"bad delete flag {flag}")
    if offset != len(data):
        raise ValueError("trailing bytes after write record")
    return KVWrite(key=key, value=value, is_delete=bool(flag), version=(height, tx_index))
