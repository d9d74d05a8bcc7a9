import numpy as np
import pytest

from altproj.instances import chain_from_joint, random_instance
from altproj.measures import SupportSet, from_weights, uniform


@pytest.fixture
def full22():
    return SupportSet.full(2, 2)


@pytest.fixture
def uniform_chain(full22):
    return chain_from_joint(uniform(full22))


@pytest.fixture
def hand_joint():
    return from_weights([[0.1, 0.2], [0.3, 0.4]])


@pytest.fixture(params=[(3, 3, 1.0, 42), (4, 3, 0.7, 5), (2, 5, 1.0, 11), (5, 4, 0.7, 8)])
def random_chain(request):
    return random_instance(*request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion(request):
    """Record ``(number, title, passed, detail)`` for the terminal summary."""

    def record(number, title, passed, detail=""):
        ACCEPTANCE_LINES[number] = f"{'PASS' if passed else 'FAIL'}  criterion {number}: {title}  {detail}".rstrip()
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
