"""Compact binary records for protocol messages.

Each record is a protocol id varint followed by a payload:

* symbol messages (krr, pgr, hr): one varint;
* bit-vector messages (rappor): the bits packed little-endian, lowest
  symbol in the lowest bit of the first byte;
* subset messages (ss): a varint count, then the members ascending, each a
  varint;
* split messages: the base protocol id, a varint round count, then the base
  payloads back to back.

Varints are unsigned LEB128.  The format is an internal convenience for
persisting harness traffic; stability is only promised within one version.
"""

from __future__ import annotations

import math

import numpy as np

from ldp_hist.protocols import (
    IntersectionFamilyProtocol,
    KRandomizedResponse,
    LocalProtocol,
    Rappor,
    SubsetSelection,
)
from ldp_hist.transform import SplitProtocol

SPLIT_ID = 6


def protocol_id(protocol: LocalProtocol) -> int:
    if isinstance(protocol, SplitProtocol):
        return SPLIT_ID
    if isinstance(protocol, KRandomizedResponse):
        return 1
    if isinstance(protocol, Rappor):
        return 2
    if isinstance(protocol, SubsetSelection):
        return 3
    if isinstance(protocol, IntersectionFamilyProtocol):
        return {"pgr": 4, "hr": 5}[protocol.name]
    raise ValueError(f"no record id for protocol {protocol.name!r}")


def encode_varint(value: int) -> bytes:
    if value < 0:
        raise ValueError("varints are unsigned")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def decode_varint(data: bytes, pos: int) -> tuple[int, int]:
    value = shift = 0
    while True:
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7


def _encode_payload(protocol: LocalProtocol, message) -> bytes:
    if isinstance(protocol, SplitProtocol):
        parts = [encode_varint(protocol_id(protocol.base)), encode_varint(protocol.uses)]
        parts += [_encode_payload(protocol.base, m) for m in message]
        return b"".join(parts)
    if isinstance(protocol, Rappor):
        bits = np.asarray(message, dtype=np.uint8)
        return np.packbits(bits, bitorder="little").tobytes()
    if isinstance(protocol, SubsetSelection):
        members = np.asarray(message, dtype=np.int64)
        return b"".join([encode_varint(members.size)] + [encode_varint(int(m)) for m in members])
    return encode_varint(int(message))


def _decode_payload(protocol: LocalProtocol, data: bytes, pos: int):
    if isinstance(protocol, SplitProtocol):
        base_id, pos = decode_varint(data, pos)
        if base_id != protocol_id(protocol.base):
            raise ValueError(f"base protocol id mismatch: {base_id}")
        uses, pos = decode_varint(data, pos)
        if uses != protocol.uses:
            raise ValueError(f"round count mismatch: {uses} != {protocol.uses}")
        rounds = []
        for _ in range(uses):
            m, pos = _decode_payload(protocol.base, data, pos)
            rounds.append(np.asarray(m))
        return np.stack(rounds), pos
    if isinstance(protocol, Rappor):
        nbytes = math.ceil(protocol.k / 8)
        packed = np.frombuffer(data[pos : pos + nbytes], dtype=np.uint8)
        bits = np.unpackbits(packed, bitorder="little")[: protocol.k]
        return bits, pos + nbytes
    if isinstance(protocol, SubsetSelection):
        count, pos = decode_varint(data, pos)
        members = np.empty(count, dtype=np.int64)
        for i in range(count):
            members[i], pos = decode_varint(data, pos)
        return members, pos
    value, pos = decode_varint(data, pos)
    return value, pos


def encode_message(protocol: LocalProtocol, message) -> bytes:
    """One message as a self-tagged binary record."""
    return encode_varint(protocol_id(protocol)) + _encode_payload(protocol, message)


def decode_message(protocol: LocalProtocol, data: bytes):
    """Inverse of encode_message for the same protocol instance."""
    tag, pos = decode_varint(data, 0)
    if tag != protocol_id(protocol):
        raise ValueError(f"record tagged {tag} does not match protocol {protocol.name!r}")
    message, pos = _decode_payload(protocol, data, pos)
    if pos != len(data):
        raise ValueError(f"{len(data) - pos} trailing bytes in record")
    return message
