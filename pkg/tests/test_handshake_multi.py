import pytest

from privhandshake.common import Role
from privhandshake.credentials import PaddedArray, Slot, build_padded_array, new_group_secret
from privhandshake.crypto_kdf import HashRole, keyed_tag, role_hash
from privhandshake.errors import SizeError, StateError
from privhandshake.handshake_multi import MultiHandshake
from privhandshake.wire import MsgType, WireMessage, decode, encode


def pair(params, rng, a_groups, b_groups, m=3, ma=None, mb=None):
    a = build_padded_array(a_groups, ma or m, rng=rng)
    b = build_padded_array(b_groups, mb or m, rng=rng)
    return MultiHandshake(Role.INITIATOR, params, a, rng), MultiHandshake(Role.RESPONDER, params, b, rng)


def run(i, r):
    wire = [encode(i.start())]
    (b1,) = r.on_message(wire[0])
    wire.append(encode(b1))
    (t1,) = i.on_message(b1)
    wire.append(encode(t1))
    (t2,) = r.on_message(t1)
    wire.append(encode(t2))
    assert i.on_message(t2) == []
    return wire


def test_first_message_values(toy, rng):
    arr = build_padded_array([], 3, rng=rng)
    assert MultiHandshake(Role.INITIATOR, toy, arr, rng, exponent=3).start().payload == b"\x08"
    assert MultiHandshake(Role.INITIATOR, toy, arr, rng, exponent=4).start().payload == b"\x10"


def test_worked_intersection(toy, rng):
    red, blue = new_group_secret("red", rng), new_group_secret("blue", rng)
    i, r = pair(toy, rng, [red], [red, blue])
    wire = run(i, r)
    assert i.outcome.matched == r.outcome.matched == {"red"}
    assert i.k == r.k == i.outcome.session_key == r.outcome.session_key
    shared = pow(r.element, i.x, toy.p)
    assert i.k == role_hash(HashRole.MULTIKEY, shared, toy)
    sent = decode(wire[2]).tags()
    assert keyed_tag(i.k, Role.INITIATOR, red.secret) in sent
    assert len(wire) == 4


def test_intersection_in_production_group(modp, rng):
    gs = [new_group_secret(f"g{n}", rng) for n in range(5)]
    i, r = pair(modp, rng, gs[:3], gs[2:], m=4)
    run(i, r)
    assert i.outcome.matched == r.outcome.matched == {"g2"}


def test_disjoint(toy, rng):
    i, r = pair(toy, rng, [new_group_secret("a", rng)], [new_group_secret("b", rng)])
    run(i, r)
    assert i.outcome.matched == r.outcome.matched == frozenset()


def test_reflected_tagset_never_matches(toy, rng):
    red = new_group_secret("red", rng)
    i, r = pair(toy, rng, [red], [red])
    (b1,) = r.on_message(i.start())
    (t1,) = i.on_message(b1)
    # same bytes relabelled as the responder's set: only the direction differs
    echoed = WireMessage(MsgType.TAGSET_R, t1.payload)
    i.on_message(echoed)
    assert i.outcome.matched == frozenset()


def test_reflected_frame_rejected(toy, rng):
    red = new_group_secret("red", rng)
    i, r = pair(toy, rng, [red], [red])
    (b1,) = r.on_message(i.start())
    (t1,) = i.on_message(b1)
    with pytest.raises(StateError):
        i.on_message(encode(t1))
    assert i.outcome.matched == frozenset() and i.outcome.aborted


def test_m_mismatch_aborts(toy, rng):
    red = new_group_secret("red", rng)
    i, r = pair(toy, rng, [red], [red], ma=4, mb=8)
    (b1,) = r.on_message(i.start())
    (t1,) = i.on_message(b1)
    with pytest.raises(SizeError):
        r.on_message(t1)
    assert r.outcome.aborted and r.outcome.matched == frozenset()


def test_traffic_counts(toy, rng):
    gs = [new_group_secret(f"g{n}", rng) for n in range(8)]
    i, r = pair(toy, rng, gs, gs, m=8)
    wire = run(i, r)
    msgs = [decode(w) for w in wire]
    assert sum(m.msg_type.is_dh for m in msgs) == 2
    assert sum(len(m.tags()) for m in msgs if m.msg_type.is_tagset) == 16
    assert i.outcome.matched == {g.id for g in gs}


def test_matched_only_real_slots(toy, rng):
    red = new_group_secret("red", rng)
    # a padding slot that happens to hold red's secret still never reports
    fake = PaddedArray((Slot(red.secret, False), Slot(rng.randbytes(32), False)))
    i = MultiHandshake(Role.INITIATOR, toy, fake, rng)
    r = MultiHandshake(Role.RESPONDER, toy, build_padded_array([red], 2, rng=rng), rng)
    run(i, r)
    assert i.outcome.matched == frozenset()
    assert r.outcome.matched == {"red"}
