import numpy as np
import pytest

from qdeconv.checks import random_model

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def sampled_models():
    """200 random valid (prior, channel) pairs on 1..4 modes."""
    gen = np.random.default_rng(7)
    return [random_model(gen) for _ in range(200)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
