import warnings

import pytest

from zenojunction.fockfc import FcTable, TruncationWarning
from zenojunction.junction import JunctionParams, table_for_mode
from zenojunction.rates import ModeParams

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(ACCEPTANCE[criterion])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


class Physics:
    """Junction table and Franck-Condon table for one mode."""

    def __init__(self, mode, p=None, v_max=420.0):
        self.p = p or JunctionParams()
        self.mode = mode
        self.iv = table_for_mode(self.p, mode.photon_voltage, mode.cutoff, mode.l_max, v_max=v_max)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            self.fc = FcTable.build(mode.lam, mode.cutoff, mode.l_max)

    @property
    def args(self):
        return self.mode, self.iv, self.fc


@pytest.fixture(scope="session")
def paper():
    """Default parameters, N = 15."""
    return Physics(ModeParams())


@pytest.fixture(scope="session")
def small():
    """Default parameters with a short Fock ladder, for the heavier solvers."""
    return Physics(ModeParams(cutoff=8))


@pytest.fixture(scope="session")
def harmonic():
    """Nearly linear mode (λ = 0.01)."""
    return Physics(ModeParams(lam=0.01, cutoff=8, l_max=4))
