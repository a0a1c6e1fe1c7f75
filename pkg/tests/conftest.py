import numpy as np
import pytest

from netenergy import Network


@pytest.fixture
def p3():
    """Three-vertex path o -- a -- b with conductances 1 and 2."""
    return Network([("o", "a", 1.0), ("a", "b", 2.0)], origin="o")


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)
