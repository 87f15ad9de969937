"""Arithmetic in the prime-order subgroup of a safe-prime group.

Elements and exponents are plain ints; ``GroupParams`` carries the modulus
and is the only context they need. Secret exponents go through
``gmpy2.powmod_sec`` so running time does not depend on their bit pattern.
"""

from __future__ import annotations

import functools
import hashlib
from dataclasses import dataclass
from pathlib import Path

import gmpy2

from .errors import ParameterError, RangeError, SubgroupError

MILLER_RABIN_ROUNDS = 64
GENERATOR_LABEL = b"ph-gen"
MAX_GENERATOR_RETRIES = 255

# RFC 3526, 2048-bit MODP group (group 14)
MODP_2048_P = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1"
    "29024E088A67CC74020BBEA63B139B22514A08798E3404DD"
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245"
    "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D"
    "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F"
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D"
    "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9"
    "DE2BCBF6955817183995497CEA956AE515D2261898FA0510"
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)


@dataclass(frozen=True)
class GroupParams:
    """Safe prime ``p = 2q + 1`` with a public generator ``g`` of order ``q``."""

    p: int
    q: int
    g: int

    @property
    def element_width(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def check(self, rounds: int = MILLER_RABIN_ROUNDS) -> "GroupParams":
        """Probabilistically verify the safe-prime structure; returns self."""
        p, q, g = self.p, self.q, self.g
        if p < 7 or (p - 1) // 2 != q or p % 2 == 0:
            raise ParameterError("p must be an odd safe prime 2q+1")
        if not gmpy2.is_prime(q, rounds):
            raise ParameterError("q is not prime")
        if not gmpy2.is_prime(p, rounds):
            raise ParameterError("p is not prime")
        if not 1 < g < p - 1 or gmpy2.powmod(g, q, p) != 1:
            raise ParameterError("g does not generate the order-q subgroup")
        return self

    def to_text(self) -> str:
        return f"p = {self.p:x}\nq = {self.q:x}\ng = {self.g:x}\n"


TEST_GROUP = GroupParams(p=23, q=11, g=2)


@functools.lru_cache(maxsize=None)
def modp2048() -> GroupParams:
    """The default production group, validated once per process."""
    return GroupParams(p=MODP_2048_P, q=(MODP_2048_P - 1) // 2, g=2).check()


def parse_group_text(text: str) -> GroupParams:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParameterError(f"line {lineno}: expected 'key = hex'")
        values[key.strip().lower()] = value.strip()
    try:
        p, q, g = (int(values[k], 16) for k in ("p", "q", "g"))
    except KeyError as exc:
        raise ParameterError(f"missing group parameter {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ParameterError(f"bad hex value: {exc}") from None
    return GroupParams(p=p, q=q, g=g).check()


def load_group(path) -> GroupParams:
    """Load hex-encoded ``p``, ``q``, ``g`` from a ``key = value`` file."""
    return parse_group_text(Path(path).read_text())


def mod_exp(base: int, e: int, params: GroupParams) -> int:
    """``base ** e mod p`` in time independent of the bits of ``e``."""
    if e < 0:
        raise ValueError("negative exponent")
    if e == 0:
        # powmod_sec refuses a zero exponent; secret exponents are never zero
        return 1 % params.p
    return int(gmpy2.powmod_sec(base, e, params.p))


def encode_element(value: int, params: GroupParams) -> bytes:
    return value.to_bytes(params.element_width, "big")


def is_subgroup_member(value: int, params: GroupParams) -> bool:
    # Euler's criterion: for prime p, value**q == 1 iff the Jacobi symbol is 1
    return gmpy2.jacobi(value, params.p) == 1


def validate_element(raw: bytes, params: GroupParams) -> int:
    """Decode a received element and reject anything outside the subgroup."""
    if len(raw) != params.element_width:
        raise RangeError(
            f"element encoding is {len(raw)} bytes, expected {params.element_width}"
        )
    value = int.from_bytes(raw, "big")
    if not 2 <= value <= params.p - 2:
        raise RangeError("element outside [2, p-2]")
    if not is_subgroup_member(value, params):
        raise SubgroupError("element not in the order-q subgroup")
    return value


def random_exponent(rng, params: GroupParams) -> int:
    """Uniform exponent in [1, q-1] by rejection sampling."""
    bits = params.q.bit_length()
    while True:
        e = rng.getrandbits(bits)
        if 1 <= e < params.q:
            return e


def random_element(rng, params: GroupParams) -> int:
    """Uniform non-identity subgroup element (a random square)."""
    t = rng.randrange(2, params.p - 1)
    return t * t % params.p


def map_to_subgroup(t: int, params: GroupParams):
    """Square ``t`` into the subgroup; ``None`` for the degenerate results 0 and 1."""
    v = t * t % params.p
    return None if v in (0, 1) else v


def _expand(secret: bytes, counter: int, width: int) -> bytes:
    out = bytearray()
    block = 0
    while len(out) < width:
        h = hashlib.sha256()
        h.update(GENERATOR_LABEL)
        h.update(bytes([counter]))
        h.update(block.to_bytes(4, "big"))
        h.update(secret)
        out += h.digest()
        block += 1
    return bytes(out[:width])


def derive_generator(secret: bytes, params: GroupParams) -> int:
    """Deterministically hash a group secret to a subgroup generator."""
    for counter in range(MAX_GENERATOR_RETRIES + 1):
        t = int.from_bytes(_expand(secret, counter, params.element_width), "big") % params.p
        v = map_to_subgroup(t, params)
        if v is not None:
            return v
    raise RuntimeError("generator derivation failed; hash output is degenerate")
