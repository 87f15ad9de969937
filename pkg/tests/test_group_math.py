import hashlib
import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ScriptedRng
from privhandshake.errors import ParameterError, RangeError, SubgroupError
from privhandshake.group_math import (
    MODP_2048_P,
    GroupParams,
    derive_generator,
    encode_element,
    is_subgroup_member,
    load_group,
    map_to_subgroup,
    mod_exp,
    parse_group_text,
    random_element,
    random_exponent,
    validate_element,
)


def naive_pow(base, e, p):
    acc = 1
    for _ in range(e):
        acc = acc * base % p
    return acc


def subgroup(params):
    return sorted({naive_pow(params.g, e, params.p) for e in range(1, params.q + 1)})


def test_mod_exp_worked_values(toy):
    assert mod_exp(2, toy.q, toy) == 1
    assert mod_exp(5, 3, toy) == 10
    assert mod_exp(toy.g, 1, toy) == toy.g


def test_mod_exp_exhaustive_toy(toy):
    for base in range(toy.p):
        for e in range(2 * toy.p):
            assert mod_exp(base, e, toy) == naive_pow(base, e, toy.p)


def test_dh_commutativity_exhaustive(toy):
    for s in subgroup(toy):
        for a, b in itertools.product(range(1, toy.q), repeat=2):
            assert mod_exp(mod_exp(s, a, toy), b, toy) == mod_exp(mod_exp(s, b, toy), a, toy)


def test_group_checks(toy, modp):
    toy.check()
    assert modp.p == MODP_2048_P and modp.q == (MODP_2048_P - 1) // 2 and modp.g == 2
    assert modp.element_width == 256
    assert toy.element_width == 1


@pytest.mark.parametrize(
    "p,q,g",
    [
        (21, 10, 2),  # p composite
        (29, 14, 4),  # q composite
        (23, 11, 22),  # order 2
        (23, 11, 1),
        (23, 11, 5),  # 5 is a non-residue, order 22
        (23, 7, 2),  # q != (p-1)/2
    ],
)
def test_bad_parameters_rejected(p, q, g):
    with pytest.raises(ParameterError):
        GroupParams(p, q, g).check()


def test_group_file_round_trip(tmp_path, modp):
    path = tmp_path / "group.txt"
    path.write_text("# comment\n" + modp.to_text())
    assert load_group(path) == modp
    with pytest.raises(ParameterError):
        parse_group_text("p = 17\nq = b\n")
    with pytest.raises(ParameterError):
        parse_group_text("p = zz\nq = b\ng = 2\n")


def test_validate_element_boundaries(toy):
    assert validate_element(encode_element(2, toy), toy) == 2
    with pytest.raises(RangeError):
        validate_element(encode_element(1, toy), toy)
    with pytest.raises(RangeError):
        validate_element(encode_element(22, toy), toy)
    with pytest.raises(RangeError):
        validate_element(encode_element(0, toy), toy)
    with pytest.raises(RangeError):
        validate_element(bytes([23]), toy)
    with pytest.raises(RangeError):
        validate_element(b"\x00\x02", toy)
    with pytest.raises(RangeError):
        validate_element(b"", toy)
    with pytest.raises(SubgroupError):
        validate_element(encode_element(5, toy), toy)


def test_membership_matches_order_check(toy, modp, rng):
    for v in range(1, toy.p):
        assert is_subgroup_member(v, toy) == (naive_pow(v, toy.q, toy.p) == 1)
    for _ in range(50):
        v = rng.randrange(2, modp.p - 1)
        assert is_subgroup_member(v, modp) == (pow(v, modp.q, modp.p) == 1)


@given(st.integers(min_value=2, max_value=21))
def test_accepted_elements_reencode_identically(v):
    toy = GroupParams(23, 11, 2)
    raw = encode_element(v, toy)
    try:
        value = validate_element(raw, toy)
    except SubgroupError:
        return
    assert encode_element(value, toy) == raw


def test_reencode_2048_left_padded(modp):
    small = mod_exp(modp.g, 1, modp)
    raw = encode_element(small, modp)
    assert len(raw) == 256 and raw[:255] == bytes(255)
    assert encode_element(validate_element(raw, modp), modp) == raw


def test_random_exponent_rejection(toy):
    assert random_exponent(ScriptedRng([0, 7]), toy) == 7
    assert random_exponent(ScriptedRng([11, 3]), toy) == 3
    assert random_exponent(ScriptedRng([15, 12, 1]), toy) == 1


def test_random_exponent_frequencies(toy, rng):
    n = 10_000
    counts = [0] * toy.q
    for _ in range(n):
        counts[random_exponent(rng, toy)] += 1
    assert counts[0] == 0
    expect = n / 10
    sigma = math.sqrt(n * 0.1 * 0.9)
    for c in counts[1:]:
        assert abs(c - expect) < 5 * sigma


def test_random_element_in_subgroup(toy, rng):
    seen = {random_element(rng, toy) for _ in range(500)}
    assert seen == set(subgroup(toy)) - {1}


def test_map_to_subgroup(toy):
    assert map_to_subgroup(5, toy) == 2
    assert map_to_subgroup(22, toy) is None
    assert map_to_subgroup(1, toy) is None
    assert map_to_subgroup(0, toy) is None


def oracle_generator(secret, params):
    width = (params.p.bit_length() + 7) // 8
    for counter in range(256):
        stream = b"".join(
            hashlib.sha256(b"ph-gen" + bytes([counter]) + i.to_bytes(4, "big") + secret).digest()
            for i in range(width // 32 + 1)
        )
        t = int.from_bytes(stream[:width], "big") % params.p
        v = t * t % params.p
        if v not in (0, 1):
            return v, counter


def test_derive_generator_matches_oracle(toy, modp, rng):
    for _ in range(200):
        secret = rng.randbytes(32)
        assert derive_generator(secret, toy) == oracle_generator(secret, toy)[0]
    for _ in range(5):
        secret = rng.randbytes(32)
        assert derive_generator(secret, modp) == oracle_generator(secret, modp)[0]


def test_derive_generator_retries_degenerate_square(toy, rng):
    while True:
        secret = rng.randbytes(32)
        value, counter = oracle_generator(secret, toy)
        if counter > 0:
            break
    first = hashlib.sha256(b"ph-gen" + b"\x00" + bytes(4) + secret).digest()[0] % 23
    assert first in (0, 1, 22)
    assert derive_generator(secret, toy) == value
    assert derive_generator(secret, toy) == derive_generator(secret, toy)


def test_derived_generators_always_valid(toy):
    r = random.Random(5)
    for _ in range(10_000):
        g = derive_generator(r.randbytes(32), toy)
        assert validate_element(encode_element(g, toy), toy) == g
