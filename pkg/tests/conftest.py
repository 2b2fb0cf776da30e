import numpy as np
import pytest

from ssh_hom import LatticeSpec, Schedule


@pytest.fixture(scope="session")
def spec16():
    """Working-scale chain: 2N=16 sites, v0=0.6."""
    return LatticeSpec(n_cells=8, v0=0.6)


@pytest.fixture(scope="session")
def sched252():
    return Schedule(252.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
