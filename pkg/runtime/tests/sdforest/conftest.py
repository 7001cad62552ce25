"""Shared fixtures: small random designs and tiny simulated datasets."""
import numpy as np
import pytest

from sdforest.simgen import SimSpec, gen_linear


@pytest.fixture
def rng():
    """Deterministic generator for test data."""
    return np.random.default_rng(20240611)


@pytest.fixture
def small_design(rng):  # pylint: disable=redefined-outer-name # useage of fixture
    """X (60 x 6) and a response depending on the first two columns."""
    X = rng.standard_normal((60, 6))
    Y = np.where(X[:, 0] > 0.2, 2.0, -1.0) + 0.5 * (X[:, 1] > -0.3) + 0.1 * rng.standard_normal(60)
    return X, Y


@pytest.fixture
def confounded_data():
    """Small confounded dataset from the linear model."""
    return gen_linear(SimSpec(n=80, p=12, q=3, n_parents=2, seed=5))
