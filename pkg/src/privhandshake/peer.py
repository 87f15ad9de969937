"""One handshake over a TCP connection.

The listener is the responder and the connecting side is the initiator.
Each process handles a single connection and closes it after the last
message of the run.
"""

from __future__ import annotations

import socket
import sys
from dataclasses import dataclass, field
from typing import Optional, TextIO

from .common import HandshakeOutcome, Protocol, Role, default_rng, seeded_rng
from .errors import ElementError, HandshakeError
from .group_math import GroupParams
from .session import NodeConfig, Transcript, new_session
from .vectors import format_vectors
from .wire import HEADER_SIZE, encode, parse_header

EXIT_OK = 0
EXIT_PROTOCOL = 2
EXIT_TRANSPORT = 3
EXIT_ELEMENT = 4

DEFAULT_TIMEOUT = 30.0


@dataclass
class PeerConfig:
    protocol: Protocol
    node: NodeConfig
    params: GroupParams
    listen: Optional[tuple] = None
    connect: Optional[tuple] = None
    seed: Optional[bytes] = None
    vectors_path: Optional[str] = None
    timeout: float = DEFAULT_TIMEOUT

    def __post_init__(self):
        if (self.listen is None) == (self.connect is None):
            raise ValueError("exactly one of listen or connect is required")

    @property
    def role(self) -> Role:
        return Role.RESPONDER if self.listen is not None else Role.INITIATOR


@dataclass
class PeerReport:
    exit_code: int
    outcome: HandshakeOutcome
    transcript: Transcript = field(default_factory=Transcript)
    message: str = ""


def _recv_exact(conn: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = conn.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("peer closed the connection")
        buf += chunk
    return bytes(buf)


def recv_frame(conn: socket.socket) -> bytes:
    header = _recv_exact(conn, HEADER_SIZE)
    # rejects bad version, type and oversized lengths before reading the body
    _, length = parse_header(header)
    return header + _recv_exact(conn, length)


def _drive(conn: socket.socket, machine, transcript: Transcript) -> None:
    role = machine.role

    def send(msgs) -> None:
        for msg in msgs:
            data = encode(msg)
            transcript.add(role, data)
            conn.sendall(data)

    if role is Role.INITIATOR:
        send([machine.start()])
    while not machine.done:
        data = recv_frame(conn)
        transcript.add(role.other, data)
        send(machine.on_message(data))


def _open(config: PeerConfig, announce: TextIO):
    if config.connect is not None:
        return socket.create_connection(config.connect, timeout=config.timeout)
    with socket.create_server(config.listen) as server:
        host, port = server.getsockname()[:2]
        print(f"listening on {host}:{port}", file=announce, flush=True)
        server.settimeout(config.timeout)
        conn, _ = server.accept()
    conn.settimeout(config.timeout)
    return conn


def run_peer(config: PeerConfig, out: TextIO = sys.stdout) -> PeerReport:
    """Run one handshake and print its outcome; never raises on peer misbehaviour."""
    rng = seeded_rng(config.seed, config.role) if config.seed is not None else default_rng()
    machine = new_session(config.protocol, config.role, config.node, config.params, rng)
    transcript = Transcript()
    code, message, failure = EXIT_OK, "", None
    try:
        with _open(config, out) as conn:
            _drive(conn, machine, transcript)
    except HandshakeError as exc:
        code, message, failure = EXIT_PROTOCOL, f"{type(exc).__name__}: {exc}", exc
    except OSError as exc:
        code, message, failure = EXIT_TRANSPORT, f"transport: {exc}", exc
    outcome = machine.outcome or HandshakeOutcome(error=failure)
    if code == EXIT_OK and isinstance(outcome.error, ElementError):
        code, message = EXIT_ELEMENT, f"{type(outcome.error).__name__}: {outcome.error}"
    if message:
        print(f"error: {message}", file=out)
    names = ", ".join(sorted(outcome.matched)) or "(none)"
    print(f"matched: {names}", file=out)
    print(f"session key: {'established' if outcome.session_key and code == EXIT_OK else 'none'}", file=out)
    out.flush()
    if config.vectors_path:
        text = format_vectors(
            config.seed or b"",
            config.protocol,
            config.params,
            {config.role: (config.node, machine)},
            transcript,
        )
        with open(config.vectors_path, "w") as fh:
            fh.write(text)
    return PeerReport(code, outcome, transcript, message)

