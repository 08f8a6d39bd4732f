import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from twoweight import DyadicTree, StepWeight

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def positive_leaves(depth, lo=0.05, hi=20.0):
    n = 1 << depth
    return st.lists(st.floats(min_value=lo, max_value=hi, allow_nan=False), min_size=n, max_size=n)


@st.composite
def weights(draw, min_depth=1, max_depth=5):
    depth = draw(st.integers(min_value=min_depth, max_value=max_depth))
    return StepWeight(DyadicTree(depth), draw(positive_leaves(depth)))


@st.composite
def weight_triples(draw, min_depth=1, max_depth=4):
    depth = draw(st.integers(min_value=min_depth, max_value=max_depth))
    tree = DyadicTree(depth)
    return tuple(StepWeight(tree, draw(positive_leaves(depth))) for _ in range(3))


def random_weight(rng, depth, spread=1.5):
    return StepWeight(DyadicTree(depth), np.exp(spread * rng.standard_normal(1 << depth)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
