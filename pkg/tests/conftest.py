import numpy as np
import pytest

from cacherl import rng as streams
from cacherl.popularity import zipf_chain


@pytest.fixture(scope="session")
def small_chains():
    """The 2x2-state, 10-file instance used across solver tests."""
    g = zipf_chain(2, 10, [1.0, 1.5], streams.stream(7, 50), random_orderings=True)
    l = zipf_chain(2, 10, [0.7, 2.5], streams.stream(7, 51), random_orderings=True)
    return g, l


@pytest.fixture
def rng():
    return np.random.default_rng(123)
