"""
pytest configuration and shared fixtures.
"""

import logging

import numpy as np
import pytest

from netnl.services import quantum
from netnl.services.behaviors import PartyDescriptor


def pytest_configure(config):
    config.addinivalue_line("markers", "unit: fast tests of a single function or type")
    config.addinivalue_line("markers", "integration: end-to-end scenarios and command-line runs")
    config.addinivalue_line("markers", "slow: seeded sweeps over many random instances")


@pytest.fixture(autouse=True)
def quiet_package_logger():
    """Keeps the CLI from attaching file and stream handlers during tests."""
    package_logger = logging.getLogger('netnl')
    previous = getattr(package_logger, '_netnl_configured', False)
    package_logger._netnl_configured = True
    yield
    package_logger._netnl_configured = previous


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def reference_scenario():
    return quantum.reference_experiment()


@pytest.fixture(scope="session")
def reference_behavior(reference_scenario):
    return quantum.network_behavior(reference_scenario)


@pytest.fixture(scope="session")
def swap_scenario():
    return quantum.swap_event_ready_experiment()


@pytest.fixture(scope="session")
def swap_behavior(swap_scenario):
    return quantum.network_behavior(swap_scenario)


@pytest.fixture
def chsh_parties():
    return (PartyDescriptor('A', 2, 2), PartyDescriptor('C', 2, 2))


@pytest.fixture
def bilocality_parties():
    return (PartyDescriptor('A', 2, 2), PartyDescriptor('B', 1, 4), PartyDescriptor('C', 2, 2))
