import numpy as np
import pytest

from froth1d.instanton import solve_instanton
from froth1d.model import KacMeasure, ModelParams


@pytest.fixture(scope="session")
def params():
    """Default model: beta=2, J0_hat=1, single exponential atom."""
    return ModelParams.create(beta=2.0, gamma=1e-2)


@pytest.fixture(scope="session")
def two_atom_params():
    measure = KacMeasure(atoms=((0.5, 1.0), (0.5, 3.0)), lam=1.0)
    return ModelParams.create(beta=2.0, gamma=1e-2, measure=measure)


@pytest.fixture(scope="session")
def instanton_default(params):
    return solve_instanton(params, half_width=30.0, dx=1.0 / 64.0, tol=1e-10)


@pytest.fixture(scope="session")
def params_tau(params, instanton_default):
    return params.with_tau(instanton_default.tau)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
