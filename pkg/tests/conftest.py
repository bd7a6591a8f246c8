import math

import pytest

from qzeno import SpectralDensity, StatePrep, SystemParams


@pytest.fixture
def ohmic():
    return SpectralDensity(0.01, 1.0, 10.0)


@pytest.fixture
def sub_ohmic():
    return SpectralDensity(0.01, 0.8, 10.0)


@pytest.fixture
def x_prep():
    return StatePrep.qubit(math.pi / 2, 0.0)


@pytest.fixture
def z_prep():
    return StatePrep.qubit(0.0, 0.0)


@pytest.fixture
def mixed_sys():
    return SystemParams(2.0, 2.0)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
