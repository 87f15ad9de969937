import math
import os
import random
import stat

import pytest

from privhandshake.common import Protocol, seeded_rng
from privhandshake.credentials import (
    CredentialStore,
    GroupSecret,
    build_padded_array,
    format_credentials,
    load_credentials,
    new_group_secret,
    parse_credentials,
    save_credentials,
)
from privhandshake.errors import CapacityError
from privhandshake.adversary_sim import SimNetwork
from privhandshake.session import NodeConfig


def test_new_group_secret(rng):
    a, b = new_group_secret("red", rng), new_group_secret("red", rng)
    assert len(a.secret) == 32 and a.secret != b.secret
    assert new_group_secret("x", seeded_rng(b"s")).secret == new_group_secret("x", seeded_rng(b"s")).secret
    assert a.secret.hex() not in repr(a)


@pytest.mark.parametrize("bad", ["", " red", "a:b", "red "])
def test_bad_ids(bad):
    with pytest.raises(ValueError):
        GroupSecret(bad, bytes(32))


def test_padded_array_shape(rng):
    red = new_group_secret("red", rng)
    arr = build_padded_array([red], 3, rng=rng)
    assert len(arr) == 3
    assert arr.real_ids == {"red"}
    assert sum(s.real for s in arr) == 1
    pads = [s.secret for s in arr if not s.real]
    assert len(set(pads)) == 2 and red.secret not in pads

    hidden = build_padded_array([red], 3, hidden={"red"}, rng=rng)
    assert hidden.real_ids == frozenset() and len(hidden) == 3
    assert red.secret not in [s.secret for s in hidden]


def test_padded_array_errors(rng):
    groups = [new_group_secret(f"g{i}", rng) for i in range(4)]
    with pytest.raises(CapacityError):
        build_padded_array(groups, 3, rng=rng)
    with pytest.raises(ValueError):
        build_padded_array(groups[:1], 3, hidden={"typo"}, rng=rng)


def test_padding_fresh_per_build(rng):
    red = new_group_secret("red", rng)
    a = build_padded_array([red], 3, rng=rng)
    b = build_padded_array([red], 3, rng=rng)
    assert not {s.secret for s in a if not s.real} & {s.secret for s in b if not s.real}


def test_real_slot_position_uniform():
    r = random.Random(3)
    red = new_group_secret("red", r)
    n = 10_000
    counts = [0, 0, 0]
    for _ in range(n):
        arr = build_padded_array([red], 3, rng=r)
        counts[[s.real for s in arr].index(True)] += 1
    sigma = math.sqrt(n * (1 / 3) * (2 / 3))
    for c in counts:
        assert abs(c - n / 3) < 5 * sigma


def test_hidden_group_never_matches(toy):
    r = random.Random(4)
    net = SimNetwork(toy, random.Random(5))
    red, blue = new_group_secret("red", r), new_group_secret("blue", r)
    for protocol in Protocol:
        for _ in range(1000):
            a = NodeConfig.of(red, blue, m=3, hidden={"red"})
            b = NodeConfig.of(red, m=3)
            out_a, out_b, _ = net.run_session(protocol, a, b)
            assert "red" not in out_a.matched and "red" not in out_b.matched


def test_padding_never_matches(toy):
    r = random.Random(6)
    net = SimNetwork(toy, random.Random(7))
    empty = NodeConfig((), frozenset(), 3)
    for _ in range(10_000):
        out_a, out_b, _ = net.run_session(Protocol.MULTI, empty, empty)
        assert not out_a.matched and not out_b.matched


def test_credential_file_round_trip(tmp_path, rng):
    store = CredentialStore([new_group_secret("red", rng), new_group_secret("blue", rng)], 4)
    path = tmp_path / "me.creds"
    save_credentials(path, store)
    assert stat.S_IMODE(os.stat(path).st_mode) == 0o600
    loaded = load_credentials(path)
    assert loaded.groups == store.groups and loaded.max_memberships == 4
    assert loaded.get("blue") == store.groups[1]
    assert parse_credentials("# note\n\n" + format_credentials(store)).groups == store.groups


@pytest.mark.parametrize(
    "text",
    [
        "red",
        "red:abcd",
        "red:" + "zz" * 32,
        f"red:{'00' * 32}\nred:{'11' * 32}",
        "colour = 3",
        "max_memberships = 0",
    ],
)
def test_credential_file_rejects(text):
    with pytest.raises(ValueError):
        parse_credentials(text)
