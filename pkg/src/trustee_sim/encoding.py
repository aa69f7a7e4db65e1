"""Canonical byte encoding for transactions and contract call arguments.

Fields are concatenated in declaration order, each prefixed with a 4-byte
big-endian length; integers travel as 32-byte big-endian words. The scheme
is deliberately trivial so any implementation of the protocol can sign the
same bytes.
"""

from __future__ import annotations

from collections.abc import Sequence

UINT256_MAX = 2**256 - 1


def encode_fields(fields: Sequence[bytes]) -> bytes:
    out = bytearray()
    for field in fields:
        out += len(field).to_bytes(4, "big")
        out += field
    return bytes(out)


def decode_fields(data: bytes) -> list[bytes]:
    fields = []
    offset = 0
    while offset < len(data):
        if offset + 4 > len(data):
            raise ValueError("truncated length prefix")
        length = int.from_bytes(data[offset:offset + 4], "big")
        offset += 4
        if offset + length > len(data):
            raise ValueError("truncated field")
        fields.append(data[offset:offset + length])
        offset += length
    return fields


def encode_uint(value: int) -> bytes:
    if not 0 <= value <= UINT256_MAX:
        raise ValueError("value out of uint256 range")
    return value.to_bytes(32, "big")


def decode_uint(data: bytes) -> int:
    if len(data) != 32:
        raise ValueError("uint256 must be 32 bytes")
    return int.from_bytes(data, "big")
