import random

import pytest
from hypothesis import strategies as st

from _checks import random_pair_forest


@pytest.fixture
def rng():
    return random.Random(20240521)


@st.composite
def forests(draw, max_size=10, max_trees=3, alphabet=2):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_pair_forest(random.Random(seed), max_trees, max_size, alphabet)


ACCEPTANCE_LINES = []


def record_acceptance(line):
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
