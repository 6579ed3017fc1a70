import numpy as np
import pytest

from cavityswap import build_basis, build_schedule, evaluate_gate
from cavityswap.darkstates import analyze_step
from cavityswap.hamiltonian import LossParams

# criterion lines collected by the acceptance module, echoed in the terminal summary
CRITERIA: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def basis():
    return build_basis(3)


@pytest.fixture(scope="session")
def basis_u():
    return build_basis(3, include_u=True)


@pytest.fixture(scope="session")
def swap8():
    return build_schedule("swap8")


@pytest.fixture(scope="session")
def swap7():
    return build_schedule("swap7")


@pytest.fixture(scope="session")
def cnot11():
    return build_schedule("cnot11")


@pytest.fixture(scope="session")
def swap8_result(swap8):
    return evaluate_gate(swap8)


@pytest.fixture(scope="session")
def swap7_result(swap7):
    return evaluate_gate(swap7)


@pytest.fixture(scope="session")
def cnot_result(cnot11):
    return evaluate_gate(cnot11)


@pytest.fixture(scope="session")
def swap8_lossy_result(swap8):
    return evaluate_gate(swap8, loss=LossParams(0.01, 0.01, 0.01))


@pytest.fixture(scope="session")
def swap8_steps(swap8):
    return [analyze_step(swap8, k) for k in range(len(swap8.steps))]


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
