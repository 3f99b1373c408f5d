import numpy as np
import pytest

from xlris.geometry import ArrayConfig, FadingParams, SceneGeometry, draw_channels
from xlris.secrecy import NoiseAndLimits


@pytest.fixture
def desk_array():
    return ArrayConfig(M=4, N1=16, N2=4)


@pytest.fixture
def limits():
    return NoiseAndLimits()


@pytest.fixture
def desk_channels(desk_array):
    def make(seed=0, **geo):
        return draw_channels(desk_array, SceneGeometry(**geo), FadingParams(), np.random.default_rng(seed))
    return make


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
