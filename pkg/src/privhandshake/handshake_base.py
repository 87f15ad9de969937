"""Phase bookkeeping shared by both handshake state machines.

Machines never touch a socket: ``start()`` returns the first message and
``on_message()`` consumes one message and returns what to send next.
"""

from __future__ import annotations

import enum
from typing import Optional

from .common import HandshakeOutcome, Protocol, Role, default_rng
from .errors import ElementError, HandshakeError, StateError
from .group_math import GroupParams, random_exponent, validate_element
from .wire import WireMessage, decode


class Phase(enum.Enum):
    START = "start"
    SENT_DH = "sent-dh"
    SENT_CONFIRM = "sent-confirm"
    SENT_TAGS = "sent-tags"
    DONE = "done"


class Handshake:
    protocol: Protocol

    def __init__(self, role: Role, params: GroupParams, rng=None):
        self.role = role
        self.params = params
        self.rng = rng or default_rng()
        self.phase = Phase.START
        self.outcome: Optional[HandshakeOutcome] = None
        # validation failure; the run continues on a decoy value and ends empty
        self.error: Optional[Exception] = None
        self.sent: list = []
        self.received: list = []

    def _draw_exponent(self, exponent: Optional[int]) -> int:
        if exponent is None:
            return random_exponent(self.rng, self.params)
        if not 1 <= exponent < self.params.q:
            raise ValueError("exponent must lie in [1, q-1]")
        return exponent

    @property
    def done(self) -> bool:
        return self.phase is Phase.DONE

    def start(self) -> WireMessage:
        if self.role is not Role.INITIATOR or self.phase is not Phase.START:
            raise StateError(f"start() not allowed for {self.role.name} in {self.phase.name}")
        msg = self._first_message()
        self.phase = Phase.SENT_DH
        self.sent.append(msg)
        return msg

    def on_message(self, msg) -> list:
        if self.phase is Phase.DONE:
            raise StateError("session already finished")
        try:
            if not isinstance(msg, WireMessage):
                msg = decode(bytes(msg), self.params.element_width)
            handler = self._handler(msg)
            if handler is None:
                raise StateError(
                    f"{msg.msg_type.name} not expected by {self.role.name} in {self.phase.name}"
                )
            self.received.append(msg)
            out = handler(msg)
        except HandshakeError as exc:
            self._abort(exc)
            raise
        self.sent.extend(out)
        return out

    def _abort(self, exc: Exception) -> None:
        self.phase = Phase.DONE
        self.outcome = HandshakeOutcome(frozenset(), None, exc)

    def _finish(self, matched: frozenset, session_key: bytes) -> None:
        if self.error is not None:
            matched = frozenset()
        self.phase = Phase.DONE
        self.outcome = HandshakeOutcome(frozenset(matched), session_key, self.error)

    def _accept_element(self, msg: WireMessage) -> Optional[int]:
        """Validated peer element, or ``None`` after recording the failure."""
        try:
            return validate_element(msg.payload, self.params)
        except ElementError as exc:
            self.error = exc
            return None

    def _first_message(self) -> WireMessage:
        raise NotImplementedError

    def _handler(self, msg: WireMessage):
        raise NotImplementedError

