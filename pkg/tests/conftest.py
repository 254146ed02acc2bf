import numpy as np
import pytest

from kdquasi.frames import kd_frame, qubit_zx_pair, random_pair
from kdquasi.operators import pure_state

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
KET_PLUS_I = np.array([1, 1j], dtype=complex) / np.sqrt(2)


def proj(psi):
    return np.outer(psi, np.conj(psi))


@pytest.fixture
def zx_pair():
    return qubit_zx_pair()


@pytest.fixture
def kd_left(zx_pair):
    return kd_frame(zx_pair, "left")


@pytest.fixture
def kd_right(zx_pair):
    return kd_frame(zx_pair, "right")


@pytest.fixture
def rho0():
    return pure_state(KET0)


@pytest.fixture(params=[3, 4])
def pair3(request):
    return random_pair(request.param, seed=100 + request.param)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
