import numpy as np
import pytest

from asplund import DEFAULT_PARAMS, MultichannelImage


def lip_exp(x, m=256.0):
    """Inverse of the absorption logarithm: value with lip_log(value) == x."""
    return m * (1.0 - np.exp(-np.asarray(x)))


# Values in [5, 171] keep lip_mul(k, v) inside the default clamp window
# [1, 255] for every k in [0.2, 5], so ratios stay exact.
CLAMP_FREE_LO = 5.0
CLAMP_FREE_HI = 171.0


def clamp_free_image(rng, height, width, channels, params=DEFAULT_PARAMS):
    data = rng.uniform(CLAMP_FREE_LO, CLAMP_FREE_HI, size=(height, width, channels))
    return MultichannelImage(data=data, params=params)


@pytest.fixture
def rng():
    return np.random.default_rng(20210607)
