"""Shared fixtures: the expensive simulations are computed once per session."""

import numpy as np
import pytest

from kposim import KpoParams
from kposim.tomography import tomography_measurements

# dim 42 keeps the coherent tail at p=9 below 1e-15 while making the delay
# propagators tractable; test_tomography has the dim-convergence check.
PROTOCOL_DIM = 42


@pytest.fixture(scope="session")
def params_fig2():
    return KpoParams(p=9.0, omega0=0.1, kappa_ex=0.01, kappa_int=0.005)


@pytest.fixture(scope="session")
def tomo_params_1e3():
    return KpoParams(p=9.0, omega0=0.1, kappa_ex=1e-3, kappa_int=5e-4, dim=PROTOCOL_DIM)


@pytest.fixture(scope="session")
def tomo_measurements_1e3(tomo_params_1e3):
    """Full-protocol (gate + ramp + delay) diagonals of the six reference
    states at kappa_ex = 1e-3; the heaviest shared computation."""
    return tomography_measurements(tomo_params_1e3)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
