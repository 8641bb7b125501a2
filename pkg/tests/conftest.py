import numpy as np
import pytest
from scipy.stats import unitary_group

from qdiscrim.oracle import random_density_matrix, random_pure_state
from qdiscrim.problem import DiscriminationProblem

RHO_UP = np.diag([1.0, 0.0]).astype(complex)
MIXED = np.eye(2, dtype=complex) / 2


def trine_states():
    kets = [np.array([np.cos(2 * np.pi * k / 3), np.sin(2 * np.pi * k / 3)]) for k in range(3)]
    return [np.outer(k, k).astype(complex) for k in kets]


def trine_group():
    def rot(t):
        return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]], dtype=complex)

    return [rot(2 * np.pi * k / 3) for k in range(3)]


def random_unitary(d, seed):
    return unitary_group.rvs(d, random_state=seed)


def random_mixed(d, rng):
    """Random density matrix of random rank."""
    return random_density_matrix(d, rng, rank=int(rng.integers(1, d + 1)))


@pytest.fixture
def up_vs_mixed():
    return DiscriminationProblem((RHO_UP, MIXED))


@pytest.fixture
def trine():
    return DiscriminationProblem(tuple(trine_states()))


__all__ = ["random_pure_state", "random_density_matrix"]


# acceptance criteria register a line here; printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
