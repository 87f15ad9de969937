"""Small shared types: roles, protocol selector, outcomes and randomness."""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass, field
from typing import Optional


class Role(enum.Enum):
    INITIATOR = "I"
    RESPONDER = "R"

    @property
    def byte(self) -> bytes:
        # 0x49 / 0x52, the direction byte mixed into keyed tags
        return self.value.encode("ascii")

    @property
    def other(self) -> "Role":
        return Role.RESPONDER if self is Role.INITIATOR else Role.INITIATOR


class Protocol(enum.Enum):
    SINGLE = "single"
    MULTI = "multi"


@dataclass(frozen=True)
class HandshakeOutcome:
    """What a handshake reports to its local user.

    ``matched`` holds local group ids. ``session_key`` is set on every
    completed run, including unmatched ones, and is ``None`` only when the
    run was aborted before a shared value existed. ``error`` records why a
    run was aborted or forced empty.
    """

    matched: frozenset = field(default_factory=frozenset)
    session_key: Optional[bytes] = None
    error: Optional[Exception] = None

    @property
    def aborted(self) -> bool:
        return self.error is not None


def default_rng() -> random.Random:
    """OS-entropy source for production use."""
    return random.SystemRandom()


def seeded_rng(seed: bytes, role: Optional[Role] = None) -> random.Random:
    """Deterministic generator for test harnesses and vector emission.

    Each role gets its own stream so that two peers given the same seed
    draw different exponents.
    """
    material = seed if role is None else seed + role.byte
    return random.Random(int.from_bytes(hashlib.sha256(material).digest(), "big"))
