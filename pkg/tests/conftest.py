import numpy as np
import pytest

from brmds.madogram import extremal_matrix
from brmds.simulator import nonstationary_scenario, simulate_field
from helpers import ACCEPTANCE


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def scenario():
    return nonstationary_scenario()


@pytest.fixture(scope="session")
def scenario_data(scenario):
    data = simulate_field(scenario.spec)
    return data, extremal_matrix(data)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
