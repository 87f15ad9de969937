"""Command line entry point.

Three modes, picked by the flags present:

* ``--listen``/``--connect``: run one handshake over TCP.
* ``--emit-vectors FILE`` alone: run both sides in memory (``--creds`` is
  the initiator, ``--peer-creds`` the responder) and write a vector file.
* ``--new-group ID``: add a fresh random group secret to ``--creds``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .common import Protocol
from .credentials import CredentialStore, load_credentials, new_group_secret, save_credentials
from .group_math import TEST_GROUP, GroupParams, load_group, modp2048
from .peer import PeerConfig, run_peer
from .session import NodeConfig
from .vectors import emit_vectors

BUILTIN_GROUPS = {"modp2048": modp2048, "test": lambda: TEST_GROUP}


def parse_address(text: str) -> tuple:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return (host.strip("[]") or "127.0.0.1", int(port))


def parse_seed(text: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be hex") from None


def resolve_group(spec: str) -> GroupParams:
    if spec in BUILTIN_GROUPS and not Path(spec).exists():
        return BUILTIN_GROUPS[spec]()
    return load_group(spec)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="privhandshake", description="Private group-membership handshake.")
    where = p.add_mutually_exclusive_group()
    where.add_argument("--listen", type=parse_address, metavar="HOST:PORT", help="wait for one peer (responder)")
    where.add_argument("--connect", type=parse_address, metavar="HOST:PORT", help="dial a peer (initiator)")
    p.add_argument("--protocol", choices=[x.value for x in Protocol], default="single")
    p.add_argument("--creds", metavar="FILE", help="credential file: one 'id:hex' line per group")
    p.add_argument("--peer-creds", metavar="FILE", help="responder credentials for offline vectors")
    p.add_argument("--m", type=int, help="slots per tag set (multi); default from the credential file")
    p.add_argument(
        "--group", default="modp2048", metavar="FILE", help="group parameter file, or 'modp2048' / 'test'"
    )
    p.add_argument("--hide", action="append", default=[], metavar="ID", help="leave a group out of this run")
    p.add_argument("--seed", type=parse_seed, metavar="HEX", help="deterministic randomness; testing only")
    p.add_argument("--emit-vectors", metavar="FILE", help="write a test-vector file for the run")
    p.add_argument("--new-group", metavar="ID", help="append a fresh group secret to --creds")
    p.add_argument("--timeout", type=float, default=30.0, help="socket timeout in seconds")
    return p


def _node(store: CredentialStore, m: Optional[int], hidden) -> NodeConfig:
    if m is None:
        m = store.max_memberships or max(1, len(store.groups))
    return NodeConfig(tuple(store.groups), frozenset(hidden), m)


def _load(path: Optional[str]) -> CredentialStore:
    return load_credentials(path) if path else CredentialStore([])


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.new_group:
        if not args.creds:
            parser.error("--new-group needs --creds")
        path = Path(args.creds)
        store = load_credentials(path) if path.exists() else CredentialStore([])
        if any(g.id == args.new_group for g in store.groups):
            parser.error(f"group {args.new_group!r} already present")
        store.groups.append(new_group_secret(args.new_group))
        save_credentials(path, store)
        print(f"added {args.new_group} to {path}")
        return 0

    try:
        params = resolve_group(args.group)
        store = _load(args.creds)
        node = _node(store, args.m, args.hide)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    protocol = Protocol(args.protocol)

    if args.listen is None and args.connect is None:
        if not args.emit_vectors:
            parser.error("one of --listen, --connect, --emit-vectors or --new-group is required")
        try:
            peer_store = _load(args.peer_creds)
            peer = _node(peer_store, args.m, ())
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        text = emit_vectors(args.seed or b"", protocol, params, node, peer)
        Path(args.emit_vectors).write_text(text)
        return 0

    config = PeerConfig(
        protocol,
        node,
        params,
        listen=args.listen,
        connect=args.connect,
        seed=args.seed,
        vectors_path=args.emit_vectors,
        timeout=args.timeout,
    )
    return run_peer(config).exit_code


if __name__ == "__main__":
    sys.exit(main())
