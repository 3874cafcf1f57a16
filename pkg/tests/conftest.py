import numpy as np
import pytest

from mbps import TradeSeries

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def two_tick():
    """Values (10, 30), volumes (1, 2): prices (10, 15)."""
    return TradeSeries("A", [10.0, 30.0], [1.0, 2.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_series(rng, sid="S", n=16, low=0.1, high=10.0, constant=False):
    values = rng.uniform(low, high, n)
    volumes = np.full(n, rng.uniform(low, high)) if constant else rng.uniform(low, high, n)
    return TradeSeries(sid, values, volumes)
