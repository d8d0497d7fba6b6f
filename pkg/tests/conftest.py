import math

import pytest

from composite_gates import sequence_from_pi
from composite_gates.catalog import load_catalog

PI = math.pi

# Outcome lines collected by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture
def x3():
    return sequence_from_pi([1, 1, 1], [1 / 6, 5 / 6, 1 / 6], 1, "symmetric-x", "X3")


@pytest.fixture
def single_pi():
    return sequence_from_pi([1], [0.5], 1, "symmetric-x", "single")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
