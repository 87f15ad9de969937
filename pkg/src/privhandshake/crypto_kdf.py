"""Domain-separated hashes and keyed tags, all over SHA-256."""

from __future__ import annotations

import enum
import hashlib
import hmac

from .common import Role
from .group_math import GroupParams, encode_element

TAG_SIZE = 32


class HashRole(enum.Enum):
    """Labels for the unkeyed hash family. The values are the exact ASCII prefixes."""

    KEY = b"ph-h3"
    CONFIRM_I = b"ph-h4"
    CONFIRM_R = b"ph-h5"
    MULTIKEY = b"ph-h"


def role_hash(label: HashRole, value: int, params: GroupParams) -> bytes:
    return hashlib.sha256(label.value + encode_element(value, params)).digest()


def hmac_sha256(key: bytes, msg: bytes) -> bytes:
    return hmac.new(key, msg, hashlib.sha256).digest()


def keyed_tag(k: bytes, direction: Role, secret: bytes) -> bytes:
    """Per-session tag for one group secret.

    The two directions use different messages under the same key, so a tag
    set echoed back at its sender never matches.
    """
    return hmac_sha256(k, direction.byte + secret)


def tags_equal(a: bytes, b: bytes) -> bool:
    return hmac.compare_digest(a, b)
