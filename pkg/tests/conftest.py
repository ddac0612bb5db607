import numpy as np
import pytest

from ionspins.couplings import coupling_from_trap


@pytest.fixture(scope="session")
def coupling_n7_51():
    return coupling_from_trap(7, 10.0, 5.1)


@pytest.fixture(scope="session")
def coupling_n7_53():
    return coupling_from_trap(7, 10.0, 5.3)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
