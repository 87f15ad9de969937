"""Node configuration and the one place handshake machines are built.

The simulator, the TCP peer and vector emission all go through
``new_session`` so that the same seed draws the same randomness in the same
order everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .common import Protocol, Role
from .credentials import GroupSecret, PaddedArray, build_padded_array
from .group_math import GroupParams
from .handshake_multi import MultiHandshake
from .handshake_single import SingleHandshake


@dataclass(frozen=True)
class NodeConfig:
    groups: tuple = ()
    hidden: frozenset = frozenset()
    m: int = 1
    # array reused across sessions instead of rebuilt; only for demonstrating
    # why the per-session permutation matters
    fixed_array: Optional[PaddedArray] = None
    name: str = ""
    separate_directions: bool = True

    @classmethod
    def of(cls, *groups: GroupSecret, m: Optional[int] = None, hidden=(), name=""):
        return cls(tuple(groups), frozenset(hidden), m if m is not None else max(1, len(groups)), name=name)

    def single_group(self) -> Optional[GroupSecret]:
        """The group a single-protocol run represents: first one not hidden."""
        for g in self.groups:
            if g.id not in self.hidden:
                return g
        return None

    @property
    def secrets(self) -> frozenset:
        return frozenset(g.secret for g in self.groups)


def new_session(protocol: Protocol, role: Role, node: NodeConfig, params: GroupParams, rng=None):
    if protocol is Protocol.SINGLE:
        return SingleHandshake(
            role, params, node.single_group(), rng, separate_directions=node.separate_directions
        )
    array = node.fixed_array
    if array is None:
        array = build_padded_array(node.groups, node.m, node.hidden, rng)
    return MultiHandshake(role, params, array, rng, separate_directions=node.separate_directions)


class TranscriptEntry(NamedTuple):
    sender: Role
    data: bytes

    def to_text(self) -> str:
        return f"{self.sender.value} {self.data.hex()}"

    @classmethod
    def from_text(cls, text: str) -> "TranscriptEntry":
        sender, _, hexdata = text.strip().partition(" ")
        return cls(Role(sender), bytes.fromhex(hexdata))


@dataclass
class Transcript:
    entries: list = field(default_factory=list)

    def add(self, sender: Role, data: bytes) -> None:
        self.entries.append(TranscriptEntry(sender, bytes(data)))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __eq__(self, other):
        return isinstance(other, Transcript) and self.entries == other.entries
