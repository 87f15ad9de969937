import random

import pytest

from privhandshake.group_math import TEST_GROUP, modp2048


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def toy():
    return TEST_GROUP


@pytest.fixture(scope="session")
def modp():
    return modp2048()


class ScriptedRng:
    """Returns queued values from getrandbits; falls back to a seeded stream."""

    def __init__(self, values, seed=0):
        self.values = list(values)
        self.fallback = random.Random(seed)

    def getrandbits(self, k):
        if self.values:
            return self.values.pop(0)
        return self.fallback.getrandbits(k)


ACCEPTANCE = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
