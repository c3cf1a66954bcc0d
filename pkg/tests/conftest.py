import numpy as np
import pytest
from hypothesis import settings

from hsbm.types import HsbmState, Hyperparameters, validate_network
from hsbm.dpsbm import DpsbmState

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def _tiny_hsbm():
    A1 = np.zeros((4, 4), np.uint8)
    for i, j in [(1, 2), (2, 3), (3, 4)]:
        A1[i - 1, j - 1] = A1[j - 1, i - 1] = 1
    A2 = np.zeros((4, 4), np.uint8)
    for i, j in [(1, 3), (1, 4)]:
        A2[i - 1, j - 1] = A2[j - 1, i - 1] = 1
    network = validate_network([A1, A2])
    # gamma_1 = (0.3, 0.35, 0.21), gamma_2 = (0.4, 0.24, 0.252), pi = (0.35, 0.325, 0.26)
    state = HsbmState(
        g=[np.array([1, 2, 2, 3]), np.array([1, 1, 2, 3])],
        k=[np.array([1, 2, 3]), np.array([2, 1, 3])],
        u=[np.array([0.2, 0.15, 0.3, 0.18]), np.array([0.22, 0.12, 0.2, 0.25])],
        v=[np.array([0.2, 0.3, 0.1]), np.array([0.3, 0.12, 0.26])],
        gamma_frac=[np.array([0.3, 0.5, 0.6]), np.array([0.4, 0.4, 0.7])],
        pi_frac=np.array([0.35, 0.5, 0.8]),
        eta=np.array([[0.7, 0.2, 0.4], [0.2, 0.6, 0.3], [0.4, 0.3, 0.5]]),
    )
    return network, state


@pytest.fixture
def tiny_hsbm():
    """Frozen T=2, n_t=4 state with caps 3 whose slices already cover every u, v."""
    return _tiny_hsbm()


@pytest.fixture
def tiny_dpsbm():
    A = np.zeros((4, 4), np.uint8)
    for i, j in [(1, 2), (1, 3), (3, 4)]:
        A[i - 1, j - 1] = A[j - 1, i - 1] = 1
    state = DpsbmState(
        z=np.array([1, 1, 2, 3]),
        u=np.array([0.2, 0.15, 0.16, 0.18]),
        gamma_frac=np.array([0.3, 0.5, 0.6]),
        eta=np.array([[0.7, 0.2, 0.4], [0.2, 0.6, 0.3], [0.4, 0.3, 0.5]]),
    )
    return validate_network([A])[0], state


@pytest.fixture
def hyper():
    return Hyperparameters(alpha0=1.0, gamma0=1.0, iter_max=10)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance criterion; printed again at the end of the run."""
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
