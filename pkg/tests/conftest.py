import itertools

import numpy as np
import pytest

ACCEPTANCE_LINES = []

GRID = [round(0.05 * k, 10) for k in range(1, 20)]


def no_adjacent_ones_weight(p, length, left, right):
    """Brute force: Bernoulli mass of interior words with no adjacent occupied pair,
    counting the two fixed boundary spins as neighbours."""
    total = 0.0
    for bits in itertools.product((0, 1), repeat=length):
        s = (left,) + bits + (right,)
        if any(s[i] and s[i + 1] for i in range(len(s) - 1)):
            continue
        k = sum(bits)
        total += p**k * (1 - p) ** (length - k)
    return total


def glue_is_admissible(bc, word):
    """Independent support check: no isolated occupied site on a wide stretch around the window."""
    l, r = bc.window
    lo, hi = l - 40, r + 40
    s = [int(word[x - l]) if l <= x <= r else bc.spin_at(x) for x in range(lo, hi + 1)]
    return all(not (s[i] and not s[i - 1] and not s[i + 1]) for i in range(1, len(s) - 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
