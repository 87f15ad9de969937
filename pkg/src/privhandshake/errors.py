"""Exception hierarchy shared by all handshake modules."""


class HandshakeError(Exception):
    """Base class for every error raised by this package."""


class ElementError(HandshakeError):
    """A received group element was rejected."""


class RangeError(ElementError):
    """Element value lies outside [2, p-2]."""


class SubgroupError(ElementError):
    """Element is not a member of the prime-order subgroup."""


class StateError(HandshakeError):
    """A message arrived that is not legal in the current phase."""


class SizeError(HandshakeError):
    """The peer sent a tag set whose size differs from the configured cap."""


class CapacityError(HandshakeError):
    """More memberships than array slots."""


class ParameterError(HandshakeError):
    """Group parameters failed validation."""


class FormatError(HandshakeError):
    """A wire buffer could not be decoded.

    ``category`` is one of ``version``, ``type``, ``length`` or
    ``truncation``.
    """

    CATEGORIES = ("version", "type", "length", "truncation")

    def __init__(self, category, detail=""):
        if category not in self.CATEGORIES:
            raise ValueError(f"unknown format error category {category!r}")
        self.category = category
        self.detail = detail
        msg = category if not detail else f"{category}: {detail}"
        super().__init__(msg)
