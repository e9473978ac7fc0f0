import numpy as np
import pytest
from hypothesis import strategies as st

from evcond import BivariateSample, RankData, compute_ranks
from evcond import rng as streams
from evcond.models import sample_cauchy


def ranks_from(rx, ry) -> RankData:
    return RankData(np.asarray(rx, np.int64), np.asarray(ry, np.int64))


@st.composite
def rank_configs(draw, n_min=4, n_max=200):
    """Random rank pairs with a valid ``k``."""
    n = draw(st.integers(n_min, n_max))
    perm = draw(st.permutations(range(1, n + 1)))
    mode = draw(st.sampled_from(["random", "co", "counter"]))
    if mode == "co":
        ry = list(perm)
    elif mode == "counter":
        ry = [n + 1 - r for r in perm]
    else:
        ry = draw(st.permutations(range(1, n + 1)))
    k = draw(st.integers(2, n - 1))
    return ranks_from(perm, ry), k


def comonotone(n=4) -> RankData:
    return ranks_from(range(1, n + 1), range(1, n + 1))


@pytest.fixture(scope="session")
def cauchy_2000():
    return compute_ranks(sample_cauchy(2000, streams.stream(1234, streams.SAMPLE, 0)))


@pytest.fixture(scope="session")
def cauchy_5000():
    return compute_ranks(sample_cauchy(5000, streams.stream(1234, streams.SAMPLE, 1)))


@pytest.fixture(scope="session")
def cauchy_500():
    return compute_ranks(sample_cauchy(500, streams.stream(1234, streams.SAMPLE, 2)))


def pairs(*rows) -> BivariateSample:
    return BivariateSample.from_pairs(rows)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
