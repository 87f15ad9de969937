import random
import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from privhandshake.errors import FormatError
from privhandshake.wire import (
    HEADER_SIZE,
    MAX_PAYLOAD,
    MsgType,
    WireMessage,
    decode,
    encode,
    split_frames,
)


def frame(version, msg_type, payload, length=None):
    n = len(payload) if length is None else length
    return struct.pack(">BBI", version, msg_type, n) + payload


tags = st.lists(st.binary(min_size=32, max_size=32), max_size=12)


@st.composite
def messages(draw):
    kind = draw(st.sampled_from(list(MsgType)))
    if kind.is_tagset:
        return WireMessage.tagset(kind, draw(tags))
    if kind.is_dh:
        return WireMessage(kind, draw(st.binary(min_size=1, max_size=300)))
    return WireMessage(kind, draw(st.binary(min_size=32, max_size=32)))


@given(messages())
def test_round_trip(msg):
    assert decode(encode(msg)) == msg


def test_header_layout():
    msg = WireMessage(MsgType.DH_MULTI, b"\x09")
    assert encode(msg) == bytes([1, 0x11, 0, 0, 0, 1, 9])
    assert HEADER_SIZE == 6


def test_rejections():
    cases = [
        (frame(2, 0x01, b"\x08"), "version"),
        (frame(1, 0x04, b"\x08"), "type"),
        (frame(1, 0x12, struct.pack(">H", 3) + bytes(64)), "length"),
        (frame(1, 0x02, bytes(31)), "length"),
        (frame(1, 0x01, b""), "length"),
        (frame(1, 0x12, b"\x00"), "length"),
        (frame(1, 0x01, b"\x08\x09"), "length"),  # too wide for a 1-byte group
        (frame(1, 0x01, b"\x08") + b"\x00", "length"),
        (frame(1, 0x01, b"\x08", length=2), "truncation"),
        (b"\x01\x01\x00", "truncation"),
        (frame(1, 0x01, b"", length=MAX_PAYLOAD + 1), "length"),
    ]
    for data, category in cases:
        with pytest.raises(FormatError) as exc:
            decode(data, element_width=1)
        assert exc.value.category == category, data.hex()


def test_tags_view():
    ts = [bytes([i]) * 32 for i in range(3)]
    msg = decode(encode(WireMessage.tagset(MsgType.TAGSET_I, ts)))
    assert msg.tags() == ts
    with pytest.raises(TypeError):
        WireMessage(MsgType.CONFIRM_I, bytes(32)).tags()
    with pytest.raises(ValueError):
        WireMessage.tagset(MsgType.TAGSET_I, [b"short"])


def test_split_frames():
    a = encode(WireMessage(MsgType.DH_SINGLE, b"\x08"))
    b = encode(WireMessage(MsgType.CONFIRM_I, bytes(32)))
    assert split_frames(a + b) == [a, b]
    with pytest.raises(FormatError):
        split_frames(a + b[:-1])


def _fuzz_buffer(r):
    choice = r.random()
    if choice < 0.3:
        return r.randbytes(r.randrange(0, 80))
    version = 1 if r.random() < 0.9 else r.randrange(256)
    msg_type = r.choice([t.value for t in MsgType]) if r.random() < 0.9 else r.randrange(256)
    payload = r.randbytes(r.choice([0, 1, 2, 31, 32, 33, 66, 98, r.randrange(200)]))
    if msg_type in (0x12, 0x13) and payload and r.random() < 0.5:
        count = r.randrange(4)
        payload = struct.pack(">H", count) + r.randbytes(max(0, 32 * count + r.choice([0, 0, -1, 1]) * r.randrange(2)))
    data = frame(version, msg_type, payload)
    if r.random() < 0.2:
        data = data[: r.randrange(len(data) + 1)]
    elif r.random() < 0.1:
        data += r.randbytes(r.randrange(1, 5))
    return data


def test_fuzz_no_partial_acceptance():
    r = random.Random(99)
    seen = set()
    for _ in range(100_000):
        data = _fuzz_buffer(r)
        width = r.choice([None, 1])
        try:
            msg = decode(data, width)
        except FormatError as exc:
            seen.add(exc.category)
            continue
        # anything accepted is exactly one well-formed frame
        assert encode(msg) == data
        seen.add("ok")
    assert seen == {"ok", "version", "type", "length", "truncation"}
