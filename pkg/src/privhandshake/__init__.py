"""Private handshakes: find out which secret groups two peers share, and nothing else."""

from .common import HandshakeOutcome, Protocol, Role, default_rng, seeded_rng
from .credentials import CredentialStore, GroupSecret, build_padded_array, new_group_secret
from .errors import (
    CapacityError,
    ElementError,
    FormatError,
    HandshakeError,
    ParameterError,
    RangeError,
    SizeError,
    StateError,
    SubgroupError,
)
from .group_math import TEST_GROUP, GroupParams, modp2048
from .handshake_multi import MultiHandshake
from .handshake_single import SingleHandshake
from .session import NodeConfig, Transcript, new_session

__version__ = "0.1.0"
