import numpy as np
import pytest

from ensemble_projection.analysis import label_cooccurrence_curve
from ensemble_projection.errors import InvalidSpec
from ensemble_projection.evaluation import knn_classify
from ensemble_projection.synth import BlobSpec, make_blob_arrays, make_blobs


def test_deterministic_and_balanced():
    spec = BlobSpec(5, 12, 3, seed=4)
    a, b = make_blobs(spec), make_blobs(spec)
    assert a == b
    assert np.bincount(a.labels).tolist() == [12] * 5
    assert a.n_classes == 5 and a.features.shape == (60, 3)
    assert make_blobs(BlobSpec(5, 12, 3, seed=5)) != a


def test_zero_std_gives_coincident_points():
    d = make_blobs(BlobSpec(3, 6, 2, within_std=0.0, seed=1))
    assert label_cooccurrence_curve(d, 5).p.tolist() == [1.0] * 5


def test_sample_means_near_centres():
    spec = BlobSpec(3, 2000, 4, 10.0, 1.5, seed=2)
    X, y, centers = make_blob_arrays(spec)
    for c in range(3):
        err = np.abs(X[y == c].mean(axis=0) - centers[c])
        assert np.all(err < 3 * 1.5 / np.sqrt(2000) * 2)


def test_well_separated_blobs_are_1nn_separable():
    d = make_blobs(BlobSpec(4, 20, 3, 100.0, 0.1, seed=0))
    pred = knn_classify(d.features, d.labels, d.features + 1e-9, 1)
    assert np.array_equal(pred, d.labels)


@pytest.mark.parametrize("bad", [dict(n_classes=0), dict(samples_per_class=0), dict(n_dims=0),
                                 dict(center_spread=0.0), dict(within_std=-1.0), dict(seed=-1)])
def test_invalid_spec(bad):
    with pytest.raises(InvalidSpec):
        BlobSpec(**bad)
