import numpy as np
import pytest

from ensemble_projection.synth import BlobSpec, make_blobs


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def blobs():
    return make_blobs(BlobSpec(n_classes=3, samples_per_class=20, n_dims=4,
                               center_spread=20.0, within_std=0.5, seed=7))


@pytest.fixture
def line4():
    return np.array([[0.0], [0.1], [5.0], [5.1]])
