import sys

import numpy as np
import pytest

from qkcurv.curvature import random_r1
from qkcurv.models import grassmannian_model, hp_model
from qkcurv.mu_solver import MuOptions, estimate_mu
from qkcurv.qstruct import standard_structure


@pytest.fixture(scope="session")
def q2():
    return standard_structure(2)


@pytest.fixture(scope="session")
def q3():
    return standard_structure(3)


@pytest.fixture(scope="session")
def hp2():
    return hp_model(2)


@pytest.fixture(scope="session")
def gr2():
    return grassmannian_model(2)


@pytest.fixture(scope="session")
def gr3():
    return grassmannian_model(3)


@pytest.fixture(scope="session")
def r1_seed7(q2):
    return random_r1(q2, 7)


@pytest.fixture(scope="session")
def gr2_mu(gr2):
    dec = gr2.decomposition()
    return dec, estimate_mu(dec, gr2.Q, MuOptions(restarts=64, seed=0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)



def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.format_line(number))
