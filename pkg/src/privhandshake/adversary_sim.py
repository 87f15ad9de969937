"""In-memory network under a scripted Dolev-Yao adversary.

Every message a machine emits gets a per-session sequence number. The
adversary script maps sequence numbers to rules (deliver, drop, modify,
inject, replay, reorder, reflect); unlisted numbers use the script default.
The network keeps one append-only log of every emitted message across all
sessions, so ``Replay`` can splice traffic from earlier runs into the
current one. Each delivery is recorded in ``audit`` with the rule that
produced it.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

from .common import HandshakeOutcome, Protocol, Role
from .credentials import new_group_secret
from .crypto_kdf import HashRole, keyed_tag, role_hash
from .errors import FormatError, HandshakeError, StateError
from .group_math import GroupParams, derive_generator, validate_element
from .session import NodeConfig, Transcript, new_session
from .wire import MsgType, decode, encode

MAX_DELIVERIES = 32


# -- adversary rules ---------------------------------------------------------


@dataclass(frozen=True)
class Deliver:
    label = "deliver"


@dataclass(frozen=True)
class Drop:
    label = "drop"


@dataclass(frozen=True)
class Modify:
    fn: Callable[[bytes], bytes]
    label: str = "modify"


@dataclass(frozen=True)
class Inject:
    """Deliver ``data`` to ``to`` just before the current message."""

    data: bytes
    to: Role
    label = "inject"


@dataclass(frozen=True)
class Replay:
    """Replace the current message with entry ``index`` of the network log."""

    index: int
    label = "replay"


@dataclass(frozen=True)
class Reorder:
    label = "reorder"


@dataclass(frozen=True)
class Reflect:
    """Send the message back to the node that emitted it."""

    label = "reflect"


def flip_bit(bit: int) -> Modify:
    def fn(data: bytes) -> bytes:
        out = bytearray(data)
        i = bit % (len(out) * 8)
        out[i // 8] ^= 0x80 >> (i % 8)
        return bytes(out)

    return Modify(fn, f"flip-bit-{bit}")


def flip_payload_bit(bit: int) -> Modify:
    """Flip a bit counted from the start of the payload (past the 6-byte header)."""

    def fn(data: bytes) -> bytes:
        out = bytearray(data)
        body = len(out) - 6
        if body <= 0:
            return bytes(out)
        i = bit % (body * 8)
        out[6 + i // 8] ^= 0x80 >> (i % 8)
        return bytes(out)

    return Modify(fn, f"flip-payload-bit-{bit}")


@dataclass
class Script:
    rules: dict = field(default_factory=dict)
    default: object = field(default_factory=Deliver)

    def rule_for(self, seq: int):
        return self.rules.get(seq, self.default)

    @classmethod
    def drop_all(cls) -> "Script":
        return cls(default=Drop())

    def describe(self) -> str:
        parts = [f"{seq}:{rule.label}" for seq, rule in sorted(self.rules.items())]
        return ",".join(parts) or self.default.label


# -- network -----------------------------------------------------------------


class AuditEntry(NamedTuple):
    session: int
    seq: Optional[int]
    action: str
    receiver: Role
    data: bytes
    original: bool


@dataclass
class _Envelope:
    seq: int
    sender: Role
    data: bytes
    ruled: bool = False


class SessionResult(NamedTuple):
    initiator: HandshakeOutcome
    responder: HandshakeOutcome
    transcript: Transcript


_INCOMPLETE = HandshakeOutcome(frozenset(), None, StateError("run did not complete"))


class SimNetwork:
    def __init__(self, params: GroupParams, rng=None):
        self.params = params
        self.rng = rng or random.Random()
        self.log: list = []
        self.audit: list = []
        self.sessions = 0
        self.last_machines = None

    def _spawn_rng(self):
        return random.Random(self.rng.getrandbits(64))

    def run_session(
        self,
        protocol: Protocol,
        a: NodeConfig,
        b: NodeConfig,
        script: Optional[Script] = None,
        rng_a=None,
        rng_b=None,
    ) -> SessionResult:
        """Drive one initiator (``a``) and one responder (``b``) to completion."""
        script = script or Script()
        sid = self.sessions
        self.sessions += 1
        machines = {
            Role.INITIATOR: new_session(protocol, Role.INITIATOR, a, self.params, rng_a or self._spawn_rng()),
            Role.RESPONDER: new_session(protocol, Role.RESPONDER, b, self.params, rng_b or self._spawn_rng()),
        }
        self.last_machines = machines
        transcript = Transcript()
        queue: deque = deque()
        counter = [0]

        def emit_all(sender: Role, msgs) -> None:
            for msg in msgs:
                data = encode(msg)
                transcript.add(sender, data)
                self.log.append(data)
                queue.append(_Envelope(counter[0], sender, data))
                counter[0] += 1

        deliveries = [0]

        def deliver(receiver: Role, data: bytes, seq, action: str, original: bool) -> None:
            self.audit.append(AuditEntry(sid, seq, action, receiver, data, original))
            if deliveries[0] >= MAX_DELIVERIES:
                return
            deliveries[0] += 1
            machine = machines[receiver]
            try:
                out = machine.on_message(data)
            except HandshakeError:
                return
            emit_all(receiver, out)

        emit_all(Role.INITIATOR, [machines[Role.INITIATOR].start()])
        held: Optional[_Envelope] = None
        while queue or held is not None:
            if not queue:
                queue.append(held)
                held = None
            env = queue.popleft()
            rule = Deliver() if env.ruled else script.rule_for(env.seq)
            receiver = env.sender.other
            if isinstance(rule, Deliver):
                deliver(receiver, env.data, env.seq, "deliver", True)
            elif isinstance(rule, Drop):
                self.audit.append(AuditEntry(sid, env.seq, "drop", receiver, env.data, True))
            elif isinstance(rule, Modify):
                deliver(receiver, rule.fn(env.data), env.seq, rule.label, False)
            elif isinstance(rule, Inject):
                deliver(rule.to, rule.data, None, "inject", False)
                env.ruled = True
                queue.appendleft(env)
                continue
            elif isinstance(rule, Replay):
                if 0 <= rule.index < len(self.log):
                    deliver(receiver, self.log[rule.index], env.seq, f"replay-{rule.index}", False)
                else:
                    self.audit.append(AuditEntry(sid, env.seq, "drop", receiver, env.data, True))
            elif isinstance(rule, Reflect):
                deliver(env.sender, env.data, env.seq, "reflect", False)
            elif isinstance(rule, Reorder):
                env.ruled = True
                if held is not None:
                    queue.appendleft(held)
                held = env
                continue
            else:
                raise TypeError(f"unknown rule {rule!r}")
            if held is not None:
                queue.appendleft(held)
                held = None

        outcomes = [machines[r].outcome or _INCOMPLETE for r in (Role.INITIATOR, Role.RESPONDER)]
        return SessionResult(outcomes[0], outcomes[1], transcript)


# -- safety ------------------------------------------------------------------


def outcome_violations(a: NodeConfig, out_a: HandshakeOutcome, b: NodeConfig, out_b: HandshakeOutcome) -> list:
    """Matched groups that are not in the true intersection of memberships.

    Groups are compared by secret, since ids are local aliases.
    """
    shared = a.secrets & b.secrets
    problems = []
    for label, node, out in (("initiator", a, out_a), ("responder", b, out_b)):
        by_id = {g.id: g.secret for g in node.groups}
        for gid in out.matched:
            if by_id.get(gid) not in shared:
                problems.append(f"{label} matched {gid!r} outside the intersection")
    return problems


def distinct_generator_groups(n: int, params: GroupParams, rng, prefix: str = "g") -> list:
    """Fresh group secrets whose derived bases are pairwise distinct.

    In a tiny test group two random secrets share a base with probability
    about 1/(q-1); such pairs are indistinguishable by construction, so pools
    for small-group experiments exclude them.
    """
    if n > params.q - 1:
        raise ValueError("not enough distinct generators in this group")
    groups, seen = [], set()
    while len(groups) < n:
        g = new_group_secret(f"{prefix}{len(groups)}", rng)
        base = derive_generator(g.secret, params)
        if base not in seen:
            seen.add(base)
            groups.append(g)
    return groups


_RULE_WEIGHTS = (
    ("drop", 2),
    ("flip", 3),
    ("replay", 3),
    ("reflect", 2),
    ("inject", 2),
    ("reorder", 1),
)


def random_script(rng, log: list, messages: int = 4) -> Script:
    """At least one adversarial rule among the first ``messages`` sends.

    ``log`` is the network log that replays and injections draw from.
    """
    log_size = len(log)
    names = [n for n, _ in _RULE_WEIGHTS]
    weights = [w for _, w in _RULE_WEIGHTS]
    rules = {}
    forced = rng.randrange(messages)
    for seq in range(messages):
        if seq != forced and rng.random() < 0.6:
            continue
        kind = rng.choices(names, weights)[0]
        if kind in ("replay", "inject") and log_size == 0:
            kind = "flip"
        if kind == "drop":
            rules[seq] = Drop()
        elif kind == "flip":
            if rng.random() < 0.85:
                rules[seq] = flip_payload_bit(rng.getrandbits(16))
            else:
                rules[seq] = flip_bit(rng.getrandbits(8))
        elif kind == "replay":
            rules[seq] = Replay(rng.randrange(log_size))
        elif kind == "reflect":
            rules[seq] = Reflect()
        elif kind == "inject":
            rules[seq] = Inject(log[rng.randrange(log_size)], rng.choice(list(Role)))
        else:
            rules[seq] = Reorder()
    return Script(rules)


@dataclass
class FuzzReport:
    protocol: Protocol
    runs: int = 0
    violations: list = field(default_factory=list)
    rule_counts: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def _random_node(protocol, pool, m, rng, allow_nonmembers) -> NodeConfig:
    if protocol is Protocol.SINGLE:
        if allow_nonmembers and rng.random() < 0.2:
            return NodeConfig((), frozenset(), 1)
        return NodeConfig((rng.choice(pool),), frozenset(), 1)
    k = rng.randint(0 if allow_nonmembers else 1, min(m, len(pool)))
    return NodeConfig(tuple(rng.sample(pool, k)), frozenset(), m)


def safety_fuzz(
    protocol: Protocol,
    runs: int,
    params: GroupParams,
    rng,
    pool_size: int = 4,
    m: int = 3,
    allow_nonmembers: bool = False,
) -> FuzzReport:
    """Random adversary scripts against random node pairs; collects violations."""
    pool = distinct_generator_groups(min(pool_size, params.q - 1), params, rng)
    net = SimNetwork(params, random.Random(rng.getrandbits(64)))
    report = FuzzReport(protocol)
    for run in range(runs):
        a = _random_node(protocol, pool, m, rng, allow_nonmembers)
        b = _random_node(protocol, pool, m, rng, allow_nonmembers)
        script = random_script(rng, net.log)
        for rule in script.rules.values():
            kind = rule.label.split("-")[0]
            report.rule_counts[kind] = report.rule_counts.get(kind, 0) + 1
        out_a, out_b, _ = net.run_session(protocol, a, b, script)
        report.runs += 1
        for problem in outcome_violations(a, out_a, b, out_b):
            report.violations.append((run, problem, script.describe()))
    return report


# -- transcripts -------------------------------------------------------------

_EXPECTED = {
    Protocol.SINGLE: (
        (Role.INITIATOR, MsgType.DH_SINGLE),
        (Role.RESPONDER, MsgType.DH_SINGLE),
        (Role.INITIATOR, MsgType.CONFIRM_I),
        (Role.RESPONDER, MsgType.CONFIRM_R),
    ),
    Protocol.MULTI: (
        (Role.INITIATOR, MsgType.DH_MULTI),
        (Role.RESPONDER, MsgType.DH_MULTI),
        (Role.INITIATOR, MsgType.TAGSET_I),
        (Role.RESPONDER, MsgType.TAGSET_R),
    ),
}


def check_transcript(transcript: Transcript, protocol: Protocol, params: GroupParams, m: Optional[int] = None) -> list:
    """Raise ``FormatError``/``HandshakeError`` unless the transcript is a well-formed run.

    Returns the decoded messages.
    """
    expected = _EXPECTED[protocol]
    if len(transcript) != len(expected):
        raise FormatError("length", f"{len(transcript)} messages, expected {len(expected)}")
    msgs = []
    for entry, (sender, msg_type) in zip(transcript, expected):
        msg = decode(entry.data, params.element_width)
        if entry.sender is not sender or msg.msg_type is not msg_type:
            raise StateError(f"unexpected {entry.sender.name} {msg.msg_type.name}")
        if msg_type.is_dh:
            validate_element(msg.payload, params)
        msgs.append(msg)
    if protocol is Protocol.MULTI:
        counts = {len(msgs[2].tags()), len(msgs[3].tags())}
        if len(counts) != 1 or (m is not None and counts != {m}):
            raise FormatError("length", f"tag counts {sorted(counts)}")
    return msgs


def verify_transcript(transcript: Transcript, protocol: Protocol, params: GroupParams, m: Optional[int] = None) -> bool:
    try:
        check_transcript(transcript, protocol, params, m)
    except HandshakeError:
        return False
    return True


def discrete_log_small(base: int, target: int, params: GroupParams, limit: int = 1 << 20) -> Optional[int]:
    """Exhaustive discrete log in [1, q-1]; only usable in toy groups."""
    if params.q > limit:
        raise ValueError("exhaustive discrete log refused for a large group")
    acc = 1
    for e in range(1, params.q):
        acc = acc * base % params.p
        if acc == target:
            return e
    return None


def transcript_consistent(transcript: Transcript, protocol: Protocol, params: GroupParams, secret: bytes) -> bool:
    """Could this transcript be an honest run in which both sides hold ``secret``?

    Needs exhaustive discrete logs, so only works in toy groups.
    """
    msgs = check_transcript(transcript, protocol, params)
    a1 = int.from_bytes(msgs[0].payload, "big")
    b1 = int.from_bytes(msgs[1].payload, "big")
    if protocol is Protocol.SINGLE:
        x = discrete_log_small(derive_generator(secret, params), a1, params)
        if x is None:
            return False
        shared = pow(b1, x, params.p)
        return (
            msgs[2].payload == role_hash(HashRole.CONFIRM_I, shared, params)
            and msgs[3].payload == role_hash(HashRole.CONFIRM_R, shared, params)
        )
    x = discrete_log_small(params.g, a1, params)
    if x is None:
        return False
    k = role_hash(HashRole.MULTIKEY, pow(b1, x, params.p), params)
    return keyed_tag(k, Role.INITIATOR, secret) in msgs[2].tags() and keyed_tag(
        k, Role.RESPONDER, secret
    ) in msgs[3].tags()


def forge_transcript(member: NodeConfig, protocol: Protocol, params: GroupParams, rng) -> Transcript:
    """A member fabricates a complete run by playing both sides itself.

    The result is a run "between i and i", which has the same wire format and
    distribution as a run with any other member of the same groups.
    """
    net = SimNetwork(params, random.Random(rng.getrandbits(64)))
    result = net.run_session(protocol, member, member)
    return result.transcript

