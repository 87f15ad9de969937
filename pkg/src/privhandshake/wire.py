"""Length-prefixed framing for handshake messages.

Frame layout (all integers big-endian)::

    version  1 byte   0x01
    type     1 byte   see MsgType
    length   4 bytes  payload size
    payload  length bytes

DH payloads are one fixed-width group element, CONFIRM payloads one 32-byte
tag, TAGSET payloads a 2-byte count followed by ``count * 32`` tag bytes.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Optional

from .crypto_kdf import TAG_SIZE
from .errors import FormatError

VERSION = 0x01
HEADER = struct.Struct(">BBI")
HEADER_SIZE = HEADER.size
MAX_PAYLOAD = 1 << 20


class MsgType(enum.IntEnum):
    DH_SINGLE = 0x01
    CONFIRM_I = 0x02
    CONFIRM_R = 0x03
    DH_MULTI = 0x11
    TAGSET_I = 0x12
    TAGSET_R = 0x13

    @property
    def is_dh(self) -> bool:
        return self in (MsgType.DH_SINGLE, MsgType.DH_MULTI)

    @property
    def is_tagset(self) -> bool:
        return self in (MsgType.TAGSET_I, MsgType.TAGSET_R)


@dataclass(frozen=True)
class WireMessage:
    msg_type: MsgType
    payload: bytes
    version: int = VERSION

    @classmethod
    def tagset(cls, msg_type: MsgType, tags) -> "WireMessage":
        tags = list(tags)
        if any(len(t) != TAG_SIZE for t in tags):
            raise ValueError("tags must be 32 bytes")
        return cls(msg_type, struct.pack(">H", len(tags)) + b"".join(tags))

    def tags(self) -> list:
        if not self.msg_type.is_tagset:
            raise TypeError(f"{self.msg_type.name} carries no tag set")
        body = self.payload[2:]
        return [body[i : i + TAG_SIZE] for i in range(0, len(body), TAG_SIZE)]


def encode(msg: WireMessage) -> bytes:
    return HEADER.pack(msg.version, int(msg.msg_type), len(msg.payload)) + msg.payload


def parse_header(header: bytes):
    """Validate a 6-byte header; returns ``(MsgType, payload_length)``."""
    if len(header) < HEADER_SIZE:
        raise FormatError("truncation", f"{len(header)} header bytes")
    version, raw_type, length = HEADER.unpack(header[:HEADER_SIZE])
    if version != VERSION:
        raise FormatError("version", f"unsupported version {version:#04x}")
    try:
        msg_type = MsgType(raw_type)
    except ValueError:
        raise FormatError("type", f"unknown message type {raw_type:#04x}") from None
    if length > MAX_PAYLOAD:
        raise FormatError("length", f"payload of {length} bytes exceeds limit")
    return msg_type, length


def check_payload(msg_type: MsgType, payload: bytes, element_width: Optional[int] = None):
    n = len(payload)
    if msg_type.is_dh:
        if n == 0 or (element_width is not None and n != element_width):
            raise FormatError("length", f"DH payload of {n} bytes")
    elif msg_type.is_tagset:
        if n < 2:
            raise FormatError("length", "tag set without count")
        count = struct.unpack(">H", payload[:2])[0]
        if n - 2 != count * TAG_SIZE:
            raise FormatError("length", f"count {count} but {n - 2} tag bytes")
    elif n != TAG_SIZE:
        raise FormatError("length", f"confirmation of {n} bytes")


def decode(data: bytes, element_width: Optional[int] = None) -> WireMessage:
    """Decode exactly one frame; trailing or missing bytes are errors."""
    msg_type, length = parse_header(data)
    end = HEADER_SIZE + length
    if len(data) < end:
        raise FormatError("truncation", f"need {end} bytes, have {len(data)}")
    if len(data) > end:
        raise FormatError("length", f"{len(data) - end} trailing bytes")
    payload = bytes(data[HEADER_SIZE:end])
    check_payload(msg_type, payload, element_width)
    return WireMessage(msg_type, payload)


def split_frames(data: bytes) -> list:
    """Cut a byte stream into raw frames without decoding payloads."""
    frames = []
    pos = 0
    while pos < len(data):
        _, length = parse_header(data[pos : pos + HEADER_SIZE])
        end = pos + HEADER_SIZE + length
        if end > len(data):
            raise FormatError("truncation", "stream ends inside a frame")
        frames.append(bytes(data[pos:end]))
        pos = end
    return frames
