"""Multiple-membership private handshake.

Plain Diffie-Hellman on the public generator yields a session key ``k``;
each side then sends one keyed tag per array slot::

    I -> R   DH_MULTI   g^x
    R -> I   DH_MULTI   g^y
    I -> R   TAGSET_I   [HMAC(k, 'I' || s) for s in array]
    R -> I   TAGSET_R   [HMAC(k, 'R' || s) for s in array]

A real slot matches when its opposite-direction tag appears in the received
set. Traffic is two group elements plus ``2m`` tags regardless of how many
groups either side belongs to.
"""

from __future__ import annotations

from typing import Optional

from .common import Protocol, Role
from .credentials import PaddedArray
from .crypto_kdf import HashRole, keyed_tag, role_hash, tags_equal
from .errors import SizeError
from .group_math import GroupParams, encode_element, mod_exp
from .handshake_base import Handshake, Phase
from .wire import MsgType, WireMessage

_TAGSET = {Role.INITIATOR: MsgType.TAGSET_I, Role.RESPONDER: MsgType.TAGSET_R}


class MultiHandshake(Handshake):
    protocol = Protocol.MULTI

    def __init__(
        self,
        role: Role,
        params: GroupParams,
        array: PaddedArray,
        rng=None,
        *,
        exponent: Optional[int] = None,
        separate_directions: bool = True,
    ):
        super().__init__(role, params, rng)
        # False only in experiments: both sides then tag with the initiator byte
        self.separate_directions = separate_directions
        if len(array) < 1:
            raise ValueError("array needs at least one slot")
        self.array = array
        self.m = len(array)
        self.x = self._draw_exponent(exponent)
        self.element = mod_exp(params.g, self.x, params)
        self.peer_element: Optional[int] = None
        self.k: Optional[bytes] = None
        self.sent_tags: list = []
        self.received_tags: list = []

    def _first_message(self) -> WireMessage:
        return WireMessage(MsgType.DH_MULTI, encode_element(self.element, self.params))

    def _handler(self, msg: WireMessage):
        table = {
            (Role.INITIATOR, Phase.SENT_DH, MsgType.DH_MULTI): self._initiator_dh,
            (Role.RESPONDER, Phase.START, MsgType.DH_MULTI): self._responder_dh,
            (Role.RESPONDER, Phase.SENT_DH, MsgType.TAGSET_I): self._on_tags,
            (Role.INITIATOR, Phase.SENT_TAGS, MsgType.TAGSET_R): self._on_tags,
        }
        return table.get((self.role, self.phase, msg.msg_type))

    def _derive_key(self, msg: WireMessage) -> None:
        value = self._accept_element(msg)
        self.peer_element = value
        if value is None:
            self.k = self.rng.randbytes(32)
        else:
            self.k = role_hash(HashRole.MULTIKEY, mod_exp(value, self.x, self.params), self.params)

    def _direction(self, role: Role) -> Role:
        return role if self.separate_directions else Role.INITIATOR

    def _tagset(self) -> WireMessage:
        mine = self._direction(self.role)
        self.sent_tags = [keyed_tag(self.k, mine, s.secret) for s in self.array]
        return WireMessage.tagset(_TAGSET[self.role], self.sent_tags)

    def _initiator_dh(self, msg):
        self._derive_key(msg)
        self.phase = Phase.SENT_TAGS
        return [self._tagset()]

    def _responder_dh(self, msg):
        self._derive_key(msg)
        self.phase = Phase.SENT_DH
        return [self._first_message()]

    def _on_tags(self, msg):
        received = msg.tags()
        if len(received) != self.m:
            raise SizeError(f"peer sent {len(received)} tags, expected m={self.m}")
        self.received_tags = received
        out = [self._tagset()] if self.role is Role.RESPONDER else []
        self._finish(self._match(received), self.k)
        return out

    def _match(self, received) -> frozenset:
        other = self._direction(self.role.other)
        matched = set()
        for slot in self.array:
            expected = keyed_tag(self.k, other, slot.secret)
            hit = False
            for tag in received:
                hit |= tags_equal(expected, tag)
            if hit and slot.real:
                matched.add(slot.group_id)
        return frozenset(matched)
