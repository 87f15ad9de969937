"""Single-membership private handshake.

A Diffie-Hellman exchange whose base is derived from the group secret,
followed by a key-confirmation round that doubles as the membership test::

    I -> R   DH_SINGLE  s^x
    R -> I   DH_SINGLE  s^y
    I -> R   CONFIRM_I  h4(shared)
    R -> I   CONFIRM_R  h5(shared)       sent whether or not R matched

A node without a (visible) group runs with a fresh random base, which makes
its traffic look exactly like a member's.
"""

from __future__ import annotations

from typing import Optional

from .common import Protocol, Role
from .credentials import GroupSecret
from .crypto_kdf import HashRole, role_hash, tags_equal
from .group_math import (
    GroupParams,
    derive_generator,
    encode_element,
    mod_exp,
    random_element,
)
from .handshake_base import Handshake, Phase
from .wire import MsgType, WireMessage


class SingleHandshake(Handshake):
    protocol = Protocol.SINGLE

    def __init__(
        self,
        role: Role,
        params: GroupParams,
        group: Optional[GroupSecret] = None,
        rng=None,
        *,
        generator: Optional[int] = None,
        exponent: Optional[int] = None,
        separate_directions: bool = True,
    ):
        super().__init__(role, params, rng)
        self.group = group
        # False only in experiments: both confirmations then use the same hash
        self._confirm_r_label = HashRole.CONFIRM_R if separate_directions else HashRole.CONFIRM_I
        if generator is None:
            if group is not None:
                generator = derive_generator(group.secret, params)
            else:
                generator = random_element(self.rng, params)
        self.generator = generator
        self.x = self._draw_exponent(exponent)
        self.element = mod_exp(generator, self.x, params)
        self.peer_element: Optional[int] = None
        self.shared: Optional[int] = None

    def _first_message(self) -> WireMessage:
        return WireMessage(MsgType.DH_SINGLE, encode_element(self.element, self.params))

    def _handler(self, msg: WireMessage):
        table = {
            (Role.INITIATOR, Phase.SENT_DH, MsgType.DH_SINGLE): self._initiator_dh,
            (Role.RESPONDER, Phase.START, MsgType.DH_SINGLE): self._responder_dh,
            (Role.RESPONDER, Phase.SENT_DH, MsgType.CONFIRM_I): self._responder_confirm,
            (Role.INITIATOR, Phase.SENT_CONFIRM, MsgType.CONFIRM_R): self._initiator_confirm,
        }
        return table.get((self.role, self.phase, msg.msg_type))

    def _derive_shared(self, msg: WireMessage) -> None:
        value = self._accept_element(msg)
        self.peer_element = value
        if value is None:
            self.shared = random_element(self.rng, self.params)
        else:
            self.shared = mod_exp(value, self.x, self.params)

    def _confirm(self, label: HashRole) -> bytes:
        return role_hash(label, self.shared, self.params)

    def _initiator_dh(self, msg):
        self._derive_shared(msg)
        self.phase = Phase.SENT_CONFIRM
        return [WireMessage(MsgType.CONFIRM_I, self._confirm(HashRole.CONFIRM_I))]

    def _responder_dh(self, msg):
        self._derive_shared(msg)
        self.phase = Phase.SENT_DH
        return [self._first_message()]

    def _responder_confirm(self, msg):
        ok = tags_equal(msg.payload, self._confirm(HashRole.CONFIRM_I))
        reply = WireMessage(MsgType.CONFIRM_R, self._confirm(self._confirm_r_label))
        self._finish_single(ok)
        return [reply]

    def _initiator_confirm(self, msg):
        ok = tags_equal(msg.payload, self._confirm(self._confirm_r_label))
        self._finish_single(ok)
        return []

    def _finish_single(self, ok: bool) -> None:
        matched = frozenset({self.group.id}) if ok and self.group is not None else frozenset()
        self._finish(matched, role_hash(HashRole.KEY, self.shared, self.params))
