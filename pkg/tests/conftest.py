import numpy as np
import pytest

from phasebg import PhantomSpec, disc, make_phantom, suppress_background
from phasebg.phantom import poly_spanning

N = 128
DISC = disc(60, 70, 20, -0.8)
# quadratic background rescaled to span exactly [-1.5, 1.5] rad
BG = poly_spanning((0.0, 0.3, -0.2, 0.9, 0.5, -0.6), N, N, -1.5, 1.5)
WRAP_COL = 110


def disc_phantom(**kw):
    return make_phantom(PhantomSpec(N, N, shapes=(DISC,), background_poly=BG, **kw))


@pytest.fixture(scope="session")
def phantom():
    return disc_phantom()


@pytest.fixture(scope="session")
def wrapped_phantom():
    return disc_phantom(wrap_cols=(WRAP_COL,))


@pytest.fixture(scope="session")
def suppressed(phantom):
    return suppress_background(phantom.image)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
