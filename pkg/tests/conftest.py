import numpy as np
import pytest

from carlsim.params import SystemParams, pump_rate_for_cavity_power

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def locked_params():
    """Switch-off parameters: 1e6 atoms, 2 W in the pump, locked detuning."""
    p = SystemParams(u0=-0.077, n_atoms=1e6)
    return p.replace(eta_plus=pump_rate_for_cavity_power(2.0, p))


@pytest.fixture
def molasses_params():
    p = SystemParams(u0=-0.077, n_atoms=2e5)
    p = p.replace(eta_plus=pump_rate_for_cavity_power(11.0, p))
    return p.replace(gamma_fric=9 * p.kappa)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
