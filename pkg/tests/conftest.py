import numpy as np
import pytest

from quasilab.algebra import AlgebraSpec


@pytest.fixture(scope="session")
def sqrt2():
    return AlgebraSpec.from_sqrt([2])


@pytest.fixture(scope="session")
def sqrt23():
    return AlgebraSpec.from_sqrt([2, 3])


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
