"""Group secrets, the credential file, and per-session padded arrays.

Credential file format, one record per line::

    # comment
    max_memberships = 8
    red:3f1c...   (id, colon, 64 hex digits)

Ids are local aliases and never leave the machine.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .common import default_rng
from .errors import CapacityError

SECRET_SIZE = 32


@dataclass(frozen=True)
class GroupSecret:
    id: str
    secret: bytes = field(repr=False)

    def __post_init__(self):
        if ":" in self.id or not self.id.strip() or self.id != self.id.strip():
            raise ValueError(f"invalid group id {self.id!r}")


def new_group_secret(id: str, rng=None) -> GroupSecret:
    rng = rng or default_rng()
    return GroupSecret(id, rng.randbytes(SECRET_SIZE))


@dataclass(frozen=True)
class Slot:
    secret: bytes = field(repr=False)
    real: bool
    group_id: Optional[str] = None


@dataclass(frozen=True)
class PaddedArray:
    slots: tuple

    def __len__(self):
        return len(self.slots)

    def __iter__(self):
        return iter(self.slots)

    @property
    def real_ids(self) -> frozenset:
        return frozenset(s.group_id for s in self.slots if s.real)


def build_padded_array(
    memberships: Iterable[GroupSecret],
    m: int,
    hidden: Iterable[str] = (),
    rng=None,
) -> PaddedArray:
    """Fill ``m`` slots with real secrets and fresh random padding, then shuffle.

    Hidden groups are replaced by padding for this session only.
    """
    rng = rng or default_rng()
    memberships = list(memberships)
    hidden = set(hidden)
    if len(memberships) > m:
        raise CapacityError(f"{len(memberships)} memberships exceed cap m={m}")
    unknown = hidden - {g.id for g in memberships}
    if unknown:
        # a mistyped id would otherwise silently reveal the group
        raise ValueError(f"cannot hide unknown group(s): {', '.join(sorted(unknown))}")
    slots = [Slot(g.secret, True, g.id) for g in memberships if g.id not in hidden]
    while len(slots) < m:
        slots.append(Slot(rng.randbytes(SECRET_SIZE), False))
    rng.shuffle(slots)
    return PaddedArray(tuple(slots))


@dataclass
class CredentialStore:
    groups: list
    max_memberships: Optional[int] = None

    def get(self, group_id: str) -> GroupSecret:
        for g in self.groups:
            if g.id == group_id:
                return g
        raise KeyError(group_id)


def parse_credentials(text: str) -> CredentialStore:
    groups = []
    m = None
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, value = line.partition("=")
            if key.strip() != "max_memberships":
                raise ValueError(f"line {lineno}: unknown key {key.strip()!r}")
            m = int(value.strip())
            if m < 1:
                raise ValueError(f"line {lineno}: max_memberships must be positive")
            continue
        gid, sep, hexsecret = line.rpartition(":")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'id:hex'")
        secret = bytes.fromhex(hexsecret.strip())
        if len(secret) != SECRET_SIZE:
            raise ValueError(f"line {lineno}: secret must be {SECRET_SIZE} bytes")
        gid = gid.strip()
        if gid in seen:
            raise ValueError(f"line {lineno}: duplicate id {gid!r}")
        seen.add(gid)
        groups.append(GroupSecret(gid, secret))
    return CredentialStore(groups, m)


def format_credentials(store: CredentialStore) -> str:
    lines = []
    if store.max_memberships is not None:
        lines.append(f"max_memberships = {store.max_memberships}")
    lines.extend(f"{g.id}:{g.secret.hex()}" for g in store.groups)
    return "\n".join(lines) + "\n"


def load_credentials(path) -> CredentialStore:
    return parse_credentials(Path(path).read_text())


def save_credentials(path, store: CredentialStore) -> None:
    path = Path(path)
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "w") as fh:
        fh.write(format_credentials(store))
    os.chmod(path, 0o600)
