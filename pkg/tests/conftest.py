import numpy as np
import pytest

from prechannel_lln import Ensemble, PreChannel


def random_op(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def random_channel(rng, d, scale=1.0):
    rep = rng.standard_normal((d * d, d * d)) + 1j * rng.standard_normal((d * d, d * d))
    return PreChannel(rep * scale / np.linalg.norm(rep, 2))


def random_ensemble(rng, d, size, scale=1.0):
    probs = rng.dirichlet(np.ones(size)) + 0.05
    probs /= probs.sum()
    return Ensemble(tuple(random_channel(rng, d, scale) for _ in range(size)), probs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
