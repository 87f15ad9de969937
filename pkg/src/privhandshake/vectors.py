"""Deterministic test vectors.

A vector file is plain ``key = value`` text, one value per line, keys in a
fixed order::

    format = 1
    protocol = single | multi
    seed = <hex>
    group.p / group.q / group.g = <hex>
    I.m = <int>                      (then the same block for R)
    I.group.<n> = <id>:<secret hex>  one per credential, in file order
    I.hidden.<n> = <id>
    I.exponent = <hex>               x for I, y for R
    I.generator = <hex>              single only
    I.element = <hex>                the DH value this side sent
    I.peer_element = <hex>
    I.shared = <hex>                 single only
    I.k = <hex>                      multi only
    I.slot.<n> = real <id> | pad <secret hex>    multi only, array order
    I.tag.<n> = <hex>                multi only, tags this side sent
    I.matched.<n> = <id>
    I.session_key = <hex> | none
    I.error = <text>                 only when the run recorded one
    transcript.<n> = <I|R> <frame hex>

A file written by one TCP peer carries only that peer's block. Each role's
randomness comes from ``seeded_rng(seed, role)``, so a simulated run and a
TCP run with the same seed and credentials produce the same transcript.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .adversary_sim import SimNetwork
from .common import HandshakeOutcome, Protocol, Role, seeded_rng
from .credentials import GroupSecret
from .group_math import GroupParams
from .handshake_multi import MultiHandshake
from .session import NodeConfig, Transcript, TranscriptEntry, new_session
from .wire import decode, encode

FORMAT_VERSION = 1


class VectorMismatch(ValueError):
    pass


def _role_lines(role: Role, node: NodeConfig, machine) -> list:
    r = role.value
    out = [(f"{r}.m", str(node.m))]
    out += [(f"{r}.group.{n}", f"{g.id}:{g.secret.hex()}") for n, g in enumerate(node.groups)]
    out += [(f"{r}.hidden.{n}", gid) for n, gid in enumerate(sorted(node.hidden))]
    out.append((f"{r}.exponent", f"{machine.x:x}"))
    if not isinstance(machine, MultiHandshake):
        out.append((f"{r}.generator", f"{machine.generator:x}"))
    out.append((f"{r}.element", f"{machine.element:x}"))
    if machine.peer_element is not None:
        out.append((f"{r}.peer_element", f"{machine.peer_element:x}"))
    if isinstance(machine, MultiHandshake):
        if machine.k is not None:
            out.append((f"{r}.k", machine.k.hex()))
        for n, slot in enumerate(machine.array):
            value = f"real {slot.group_id}" if slot.real else f"pad {slot.secret.hex()}"
            out.append((f"{r}.slot.{n}", value))
        out += [(f"{r}.tag.{n}", t.hex()) for n, t in enumerate(machine.sent_tags)]
    elif machine.shared is not None:
        out.append((f"{r}.shared", f"{machine.shared:x}"))
    outcome = machine.outcome or HandshakeOutcome()
    out += [(f"{r}.matched.{n}", gid) for n, gid in enumerate(sorted(outcome.matched))]
    key = outcome.session_key.hex() if outcome.session_key else "none"
    out.append((f"{r}.session_key", key))
    if outcome.error is not None:
        out.append((f"{r}.error", f"{type(outcome.error).__name__}: {outcome.error}"))
    return out


def format_vectors(
    seed: bytes,
    protocol: Protocol,
    params: GroupParams,
    roles: dict,
    transcript: Transcript,
) -> str:
    """``roles`` maps each present Role to ``(node, machine)``."""
    lines = [
        ("format", str(FORMAT_VERSION)),
        ("protocol", protocol.value),
        ("seed", seed.hex()),
        ("group.p", f"{params.p:x}"),
        ("group.q", f"{params.q:x}"),
        ("group.g", f"{params.g:x}"),
    ]
    for role in Role:
        if role in roles:
            lines += _role_lines(role, *roles[role])
    lines += [(f"transcript.{n}", e.to_text()) for n, e in enumerate(transcript)]
    return "".join(f"{k} = {v}\n" for k, v in lines)


def emit_vectors(
    seed: bytes,
    protocol: Protocol,
    params: GroupParams,
    initiator: NodeConfig,
    responder: NodeConfig,
) -> str:
    """Run both sides in memory with seeded randomness and describe everything."""
    net = SimNetwork(params)
    result = net.run_session(
        protocol,
        initiator,
        responder,
        rng_a=seeded_rng(seed, Role.INITIATOR),
        rng_b=seeded_rng(seed, Role.RESPONDER),
    )
    machines = net.last_machines
    roles = {
        Role.INITIATOR: (initiator, machines[Role.INITIATOR]),
        Role.RESPONDER: (responder, machines[Role.RESPONDER]),
    }
    return format_vectors(seed, protocol, params, roles, result.transcript)


# -- reading -----------------------------------------------------------------


def parse_vectors(text: str) -> dict:
    fields = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        fields[key.strip()] = value.strip()
    if fields.get("format") != str(FORMAT_VERSION):
        raise ValueError(f"unsupported vector format {fields.get('format')!r}")
    return fields


def _indexed(fields: dict, prefix: str) -> list:
    out, n = [], 0
    while f"{prefix}.{n}" in fields:
        out.append(fields[f"{prefix}.{n}"])
        n += 1
    return out


def _node(fields: dict, role: Role) -> Optional[NodeConfig]:
    r = role.value
    if f"{r}.m" not in fields:
        return None
    groups = []
    for item in _indexed(fields, f"{r}.group"):
        gid, _, hexsecret = item.rpartition(":")
        groups.append(GroupSecret(gid, bytes.fromhex(hexsecret)))
    hidden = frozenset(_indexed(fields, f"{r}.hidden"))
    return NodeConfig(tuple(groups), hidden, int(fields[f"{r}.m"]))


@dataclass
class VectorFile:
    seed: bytes
    protocol: Protocol
    params: GroupParams
    nodes: dict
    transcript: Transcript
    fields: dict

    def matched(self, role: Role) -> frozenset:
        return frozenset(_indexed(self.fields, f"{role.value}.matched"))

    def session_key(self, role: Role) -> Optional[bytes]:
        value = self.fields.get(f"{role.value}.session_key", "none")
        return None if value == "none" else bytes.fromhex(value)


def read_vectors(text: str) -> VectorFile:
    fields = parse_vectors(text)
    params = GroupParams(
        p=int(fields["group.p"], 16), q=int(fields["group.q"], 16), g=int(fields["group.g"], 16)
    )
    nodes = {role: node for role in Role if (node := _node(fields, role)) is not None}
    transcript = Transcript([TranscriptEntry.from_text(t) for t in _indexed(fields, "transcript")])
    return VectorFile(
        bytes.fromhex(fields["seed"]), Protocol(fields["protocol"]), params, nodes, transcript, fields
    )


def replay_vectors(text: str) -> dict:
    """Feed the recorded transcript through fresh seeded machines.

    Every frame a present role sent must be exactly what its machine emits
    when given the recorded peer frames, and the final outcomes must match
    the file. Returns the outcomes by role; raises ``VectorMismatch``.
    """
    vec = read_vectors(text)
    machines = {
        role: new_session(vec.protocol, role, node, vec.params, seeded_rng(vec.seed, role))
        for role, node in vec.nodes.items()
    }
    pending = {role: deque() for role in machines}
    if Role.INITIATOR in machines:
        pending[Role.INITIATOR].append(encode(machines[Role.INITIATOR].start()))
    for n, entry in enumerate(vec.transcript):
        if entry.sender in machines:
            if not pending[entry.sender] or pending[entry.sender].popleft() != entry.data:
                raise VectorMismatch(f"transcript.{n} differs from what {entry.sender.name} emits")
        receiver = entry.sender.other
        if receiver in machines:
            out = machines[receiver].on_message(decode(entry.data, vec.params.element_width))
            pending[receiver].extend(encode(m) for m in out)
    outcomes = {}
    for role, machine in machines.items():
        if pending[role]:
            raise VectorMismatch(f"{role.name} emitted frames missing from the transcript")
        outcome = machine.outcome or HandshakeOutcome()
        if outcome.matched != vec.matched(role) or outcome.session_key != vec.session_key(role):
            raise VectorMismatch(f"{role.name} outcome differs from the file")
        outcomes[role] = outcome
    return outcomes
