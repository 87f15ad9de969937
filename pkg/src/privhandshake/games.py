"""Distinguishing games for the privacy properties.

Each game flips a hidden coin per trial, lets an adversary strategy look at
what it is allowed to see, and counts correct guesses. A property holds at a
given trial count when the empirical advantage ``|successes/n - 1/2|`` stays
below three binomial standard deviations, ``1.5/sqrt(n)``.

Strategies:

``random``
    Ignores everything and flips a coin. Baseline for the threshold.
``observer``
    The strongest test that does not search the element space: whatever
    the adversary's own machine concludes, plus tag and element equalities
    across the transcript.
``exhaustive``
    Enumerates every subgroup element to invert hashes and derived keys.
    Feasible only in a toy group, where it shows which guarantees rest on
    the size of the group rather than on the protocol structure.

Every game also has control variants in which the adversary is given what
the property says it must not have; those must show a clear advantage, or the
game is not measuring anything.
"""

from __future__ import annotations

import argparse
import math
import random
import sys
from dataclasses import dataclass
from typing import Callable, Optional

from .adversary_sim import SimNetwork
from .common import Protocol, Role
from .credentials import build_padded_array, new_group_secret
from .crypto_kdf import HashRole, keyed_tag, role_hash
from .group_math import TEST_GROUP, GroupParams, mod_exp, modp2048
from .session import NodeConfig, Transcript
from .wire import decode

STRATEGIES = ("random", "observer", "exhaustive")


def threshold(trials: int) -> float:
    """Three standard deviations of a fair-coin success rate."""
    return 3 * math.sqrt(0.25 / trials)


@dataclass(frozen=True)
class GameResult:
    game: str
    protocol: Protocol
    trials: int
    successes: int

    @property
    def advantage(self) -> float:
        return abs(self.successes / self.trials - 0.5)

    @property
    def threshold(self) -> float:
        return threshold(self.trials)

    @property
    def passed(self) -> bool:
        return self.advantage < self.threshold

    def record(self) -> str:
        return (
            f"{self.game},{self.protocol.value},{self.trials},{self.successes},"
            f"{self.advantage:.5f},{self.threshold:.5f},{'pass' if self.passed else 'fail'}"
        )


RECORD_HEADER = "game,protocol,trials,successes,advantage,threshold,pass"


def _messages(transcript: Transcript, params: GroupParams) -> list:
    return [decode(e.data, params.element_width) for e in transcript]


def _run_trials(trials: int, rng, trial: Callable[[int], bool]) -> int:
    """Run ``trial(coin)`` for fresh coins and count correct guesses."""
    wins = 0
    for _ in range(trials):
        coin = rng.getrandbits(1)
        wins += trial(coin) == coin
    return wins


def _check_strategy(strategy: str, params: GroupParams) -> None:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "exhaustive" and params.q > 1 << 20:
        raise ValueError("exhaustive strategy needs a toy group")


def _subgroup(params: GroupParams):
    return [mod_exp(params.g, e, params) for e in range(1, params.q)]


# -- detection ---------------------------------------------------------------


def detection_game(
    protocol: Protocol,
    trials: int,
    params: GroupParams = TEST_GROUP,
    rng=None,
    *,
    strategy: str = "observer",
    control: bool = False,
    m: int = 3,
) -> GameResult:
    """Real member of a fresh group G (coin 1) or a simulator (coin 0).

    The adversary plays the responder with ``m`` groups of its own. In the
    control it also holds G.
    """
    _check_strategy(strategy, params)
    rng = rng or random.Random()
    net = SimNetwork(params, random.Random(rng.getrandbits(64)))

    def trial(coin: int) -> int:
        g = new_group_secret("G", rng)
        real = NodeConfig.of(g, m=m)
        # an empty node emits uniform elements and tags of random padding
        sim = NodeConfig((), frozenset(), m)
        own = [new_group_secret(f"A{i}", rng) for i in range(m - 1 if control else m)]
        adversary = NodeConfig.of(*(([g] if control else []) + own), m=m)
        _, seen, _ = net.run_session(protocol, real if coin else sim, adversary)
        if strategy == "random":
            return rng.getrandbits(1)
        return int(bool(seen.matched))

    name = "detection-control" if control else "detection"
    return GameResult(_name(name, strategy), protocol, trials, _run_trials(trials, rng, trial))


# -- eavesdropper ------------------------------------------------------------


def _observer_links(msgs: list, protocol: Protocol) -> bool:
    """Cross-direction equalities a passive observer can test for free."""
    if msgs[0].payload == msgs[1].payload:
        return True
    if protocol is Protocol.SINGLE:
        return msgs[2].payload == msgs[3].payload
    return bool(set(msgs[2].tags()) & set(msgs[3].tags()))


def _exhaustive_member(msgs: list, protocol: Protocol, params: GroupParams, secret: bytes, elements) -> bool:
    if protocol is Protocol.SINGLE:
        # invert both confirmations over the whole subgroup
        ci = {v for v in elements if role_hash(HashRole.CONFIRM_I, v, params) == msgs[2].payload}
        cr = {v for v in elements if role_hash(HashRole.CONFIRM_R, v, params) == msgs[3].payload}
        return bool(ci & cr)
    tags = set(msgs[2].tags())
    for v in elements:
        k = role_hash(HashRole.MULTIKEY, v, params)
        if keyed_tag(k, Role.INITIATOR, secret) in tags:
            return True
    return False


def eavesdropper_game(
    protocol: Protocol,
    trials: int,
    params: GroupParams = TEST_GROUP,
    rng=None,
    *,
    strategy: str = "observer",
    variant: str = "passive",
    m: int = 3,
) -> GameResult:
    """Responder j is in G; initiator i is in G (coin 1) or in another group.

    The adversary holds G's secret but only watches the wire. Variants:

    ``passive``  the property under test
    ``mitm``     control: the adversary, as a member of G, replaces j
    ``no-directions``  control: both directions tag with the same hash, so
                 equal tags appear on the wire whenever the two sides match
    """
    if variant not in ("passive", "mitm", "no-directions"):
        raise ValueError(f"unknown variant {variant!r}")
    _check_strategy(strategy, params)
    rng = rng or random.Random()
    net = SimNetwork(params, random.Random(rng.getrandbits(64)))
    elements = _subgroup(params) if strategy == "exhaustive" else None
    separate = variant != "no-directions"

    def trial(coin: int) -> int:
        g = new_group_secret("G", rng)
        other = new_group_secret("H", rng)
        i = NodeConfig.of(g if coin else other, m=m)
        j = NodeConfig.of(g, m=m)
        if not separate:
            i = NodeConfig(i.groups, i.hidden, i.m, separate_directions=False)
            j = NodeConfig(j.groups, j.hidden, j.m, separate_directions=False)
        if variant == "mitm":
            _, seen, _ = net.run_session(protocol, i, NodeConfig.of(g, m=m))
            return int(bool(seen.matched))
        _, _, transcript = net.run_session(protocol, i, j)
        if strategy == "random":
            return rng.getrandbits(1)
        msgs = _messages(transcript, params)
        if strategy == "exhaustive":
            return int(_exhaustive_member(msgs, protocol, params, g.secret, elements))
        return int(_observer_links(msgs, protocol))

    name = "eavesdropper" if variant == "passive" else f"eavesdropper-{variant}"
    return GameResult(_name(name, strategy), protocol, trials, _run_trials(trials, rng, trial))


# -- linkability -------------------------------------------------------------


def _features(net: SimNetwork, outcome, protocol: Protocol, known) -> tuple:
    """What the adversary's responder learns: matched set and tag positions."""
    if protocol is Protocol.SINGLE:
        return (outcome.matched,)
    machine = net.last_machines[Role.RESPONDER]
    received = machine.received_tags
    positions = []
    for g in known:
        tag = keyed_tag(machine.k, Role.INITIATOR, g.secret)
        positions.append(received.index(tag) if tag in received else -1)
    return (outcome.matched, tuple(positions))


def _pinned(node: NodeConfig, rng) -> NodeConfig:
    array = build_padded_array(node.groups, node.m, node.hidden, rng)
    return NodeConfig(node.groups, node.hidden, node.m, fixed_array=array)


def linkability_game(
    protocol: Protocol,
    trials: int,
    params: GroupParams = TEST_GROUP,
    rng=None,
    *,
    strategy: str = "observer",
    variant: str = "identical",
    m: int = 3,
) -> GameResult:
    """Is the challenge session with the reference node i (coin 1) or with j?

    The adversary, holding the same groups as both nodes, runs two reference
    sessions with i and then a challenge session. Variants:

    ``identical``  the property under test: i and j hold the same groups
    ``distinct``   control: j holds different secrets
    ``fixed-permutation``  control: each node reuses one padded array
    """
    if variant not in ("identical", "distinct", "fixed-permutation"):
        raise ValueError(f"unknown variant {variant!r}")
    _check_strategy(strategy, params)
    rng = rng or random.Random()
    net = SimNetwork(params, random.Random(rng.getrandbits(64)))

    def trial(coin: int) -> int:
        groups = [new_group_secret(f"G{n}", rng) for n in range(max(1, m - 1))]
        i = NodeConfig.of(*groups, m=m)
        if variant == "distinct":
            j = NodeConfig.of(*[new_group_secret(f"G{n}", rng) for n in range(len(groups))], m=m)
        else:
            j = NodeConfig.of(*groups, m=m)
        if variant == "fixed-permutation":
            i, j = _pinned(i, rng), _pinned(j, rng)
        adversary = NodeConfig.of(*groups, m=m)
        refs = []
        for _ in range(2):
            _, seen, _ = net.run_session(protocol, i, adversary)
            refs.append(_features(net, seen, protocol, groups))
        _, seen, _ = net.run_session(protocol, i if coin else j, adversary)
        if strategy == "random":
            return rng.getrandbits(1)
        challenge = _features(net, seen, protocol, groups)
        if challenge[0] != refs[0][0]:
            return 0
        # positions only count as a fingerprint if they held still across references
        return int(refs[0] != refs[1] or challenge == refs[0])

    name = "linkability" if variant == "identical" else f"linkability-{variant}"
    return GameResult(_name(name, strategy), protocol, trials, _run_trials(trials, rng, trial))


def _name(game: str, strategy: str) -> str:
    return game if strategy == "observer" else f"{game}[{strategy}]"


# -- suite -------------------------------------------------------------------


def standard_suite(trials: int, params: GroupParams, seed: int, protocols=tuple(Protocol)) -> list:
    """Every game, control and baseline for the given protocols."""
    results = []
    toy = params.q <= 1 << 20
    for protocol in protocols:
        runs = [
            lambda r: detection_game(protocol, trials, params, r),
            lambda r: detection_game(protocol, trials, params, r, control=True),
            lambda r: detection_game(protocol, trials, params, r, strategy="random"),
            lambda r: eavesdropper_game(protocol, trials, params, r),
            lambda r: eavesdropper_game(protocol, trials, params, r, variant="mitm"),
            lambda r: eavesdropper_game(protocol, trials, params, r, variant="no-directions"),
            lambda r: eavesdropper_game(protocol, trials, params, r, strategy="random"),
            lambda r: linkability_game(protocol, trials, params, r),
            lambda r: linkability_game(protocol, trials, params, r, variant="distinct"),
            lambda r: linkability_game(protocol, trials, params, r, strategy="random"),
        ]
        if protocol is Protocol.MULTI:
            runs.append(lambda r: linkability_game(protocol, trials, params, r, variant="fixed-permutation"))
        if toy:
            runs.append(lambda r: eavesdropper_game(protocol, trials, params, r, strategy="exhaustive"))
        for n, run in enumerate(runs):
            results.append(run(random.Random(f"{seed}:{protocol.value}:{n}")))
    return results


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="privhandshake-games", description="Run the privacy distinguishing games."
    )
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--group", choices=("test", "modp2048"), default="test")
    parser.add_argument("--protocol", choices=[p.value for p in Protocol], action="append")
    args = parser.parse_args(argv)
    params = TEST_GROUP if args.group == "test" else modp2048()
    protocols = tuple(Protocol(p) for p in args.protocol) if args.protocol else tuple(Protocol)
    print(RECORD_HEADER)
    for result in standard_suite(args.trials, params, args.seed, protocols):
        print(result.record())
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
