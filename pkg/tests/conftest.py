from fractions import Fraction

import pytest
from hypothesis import settings

from statverify.measures import COIN, REAL_LINE, bernoulli, real_world, uniform

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def fair():
    return bernoulli(Fraction(1, 2))


@pytest.fixture
def unif():
    return uniform(0, 1)


@pytest.fixture
def lumpy():
    """Half uniform on [0,1], 0.3 at 1/2, 0.2 at 2."""
    return real_world([(0, 1, [Fraction(1, 2)])], [(Fraction(1, 2), Fraction(3, 10)),
                                                   (2, Fraction(1, 5))])


@pytest.fixture
def heads():
    return COIN.singleton("H")


@pytest.fixture
def real():
    return REAL_LINE
