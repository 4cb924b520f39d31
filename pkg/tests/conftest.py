import pytest

from qsense.attack import collect_references
from qsense.device import preset


@pytest.fixture(scope="session")
def linear5():
    return preset("linear5")


@pytest.fixture(scope="session")
def refs_small(linear5):
    """Single-victim references with a reduced budget (Q1 victim, Q2 adversary)."""
    return collect_references(linear5, [1], 2, repetitions=8, shots=8192, seed=11)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import CRITERIA
    except ImportError:
        return
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
