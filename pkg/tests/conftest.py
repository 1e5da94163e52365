import pytest

from amlab.arithmetic import golden_cf
from amlab.hamiltonian import HamiltonianSystem, builtin_kick


@pytest.fixture(scope="session")
def cf80():
    return golden_cf(80)


@pytest.fixture(scope="session")
def kick_system():
    """epsilon = 1e-2 standard kick; compiled once per session."""
    return HamiltonianSystem(builtin_kick(0.3), epsilon=1e-2)


@pytest.fixture(scope="session")
def integrable_system():
    return HamiltonianSystem(builtin_kick(0.3), epsilon=0.0)
