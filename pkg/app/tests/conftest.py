import random

import pytest

from app.models import ContinuedFraction, CriticalLeaf, QuadraticMap
from app.services.circle import cantor_leaf
from app.services.dynamics import GOLDEN_MEAN


@pytest.fixture(scope="session")
def golden_cf() -> ContinuedFraction:
    return GOLDEN_MEAN


@pytest.fixture(scope="session")
def golden_map() -> QuadraticMap:
    return QuadraticMap.from_cf(GOLDEN_MEAN)


@pytest.fixture(scope="session")
def golden_leaf() -> CriticalLeaf:
    # 8/13 approximant, the deepest within the default budget
    return cantor_leaf(GOLDEN_MEAN, 6).leaf


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240917)
