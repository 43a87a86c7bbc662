import numpy as np
import pytest

from qtomo.model import prior_sample, rho_from_params


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_density(n, seed):
    """Generic full-rank density matrix for oracle tests."""
    return rho_from_params(prior_sample(2 ** n, 1.0, seed))


@pytest.fixture
def random_density_factory():
    return random_density
