import numpy as np
import pytest

from pdm_atem.hamiltonian import build_ode

MASS = "1+gamma*x^2"
HARMONIC = "0.5*x^2"

# reference values, k = 20, 30, 40, 50, 60 by column
BDD_REFERENCE = np.array([
    [0.46889047, 1.43341211, 2.35765542, 3.28397486, 4.21360362, 4.35399596],
    [0.46889665, 1.43348058, 2.35642259, 3.24660834, 4.12086916, 4.98321327],
    [0.46889650, 1.43348582, 2.35655507, 3.24585555, 4.10543833, 4.95755341],
    [0.46889651, 1.43348553, 2.35654885, 3.24599291, 4.10703835, 4.94114551],
    [0.46889651, 1.43348555, 2.35654908, 3.24598255, 4.10694346, 4.94337909],
]).T
K_LIST = [20, 30, 40, 50, 60]

# n = 0..5 at k = 30, gamma = 0.1; columns H2, H3, H4
ORDERING_REFERENCE = np.array([
    [0.50773226, 0.48833347, 0.50949336],
    [1.45551369, 1.44451856, 1.45972923],
    [2.36941282, 2.36286881, 2.37461896],
    [3.25544187, 3.25137213, 3.26106459],
    [4.13235379, 4.12882619, 4.13805287],
    [4.95997506, 4.96305356, 4.96478901],
])

# reference f coefficients of state n=2 for degrees 0, 2, ..., 12
EIGENFUNCTION_N2 = {
    20: ["1", "-1.857", "-1.619e-1", "2.060e-2", "1.515e-3", "-1.261e-4", "-6.495e-6"],
    40: ["1", "-1.856", "-1.622e-1", "2.051e-2", "1.505e-3", "-1.271e-4", "-6.662e-6"],
    60: ["1", "-1.856", "-1.622e-1", "2.051e-2", "1.504e-3", "-1.271e-4", "-6.663e-6"],
}


@pytest.fixture(scope="session")
def well_ode():
    return build_ode(MASS, HARMONIC, {"gamma": 0.1}, "BDD", capacity=64)


@pytest.fixture(scope="session")
def harmonic_ode():
    return build_ode("1", HARMONIC, {}, "BDD", capacity=64)


# one summary line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
