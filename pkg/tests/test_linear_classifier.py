import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ensemble_projection.errors import DimensionMismatch, MissingClass, NonFiniteInput
from ensemble_projection.linear_classifier import (LogRegModel, TrainOptions, loss_and_gradient,
                                                   predict, predict_proba, train)


def numeric_gradient(W, b, X, y, c_reg, h=1e-5):
    gW = np.zeros_like(W)
    gb = np.zeros_like(b)
    for arr, out in ((W, gW), (b, gb)):
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + h
            fp = loss_and_gradient(W, b, X, y, c_reg)[0]
            arr[idx] = old - h
            fm = loss_and_gradient(W, b, X, y, c_reg)[0]
            arr[idx] = old
            out[idx] = (fp - fm) / (2 * h)
    return gW, gb


def max_rel_error(a, n, floor=1e-6):
    return float(np.max(np.abs(a - n) / np.maximum(floor, np.maximum(np.abs(a), np.abs(n)))))


def two_blobs(rng, n=20):
    X = np.vstack([rng.normal((-5, 0), 0.3, size=(n, 2)), rng.normal((5, 0), 0.3, size=(n, 2))])
    return X, np.repeat([0, 1], n)


def test_separable_blobs_fit_perfectly(rng):
    X, y = two_blobs(rng)
    model = train(X, y)
    assert np.all(predict(model, X) == y)
    assert predict(model, X[0]) == 0


def test_relabelling_permutes_predictions(rng):
    X = np.vstack([rng.normal(c, 0.5, size=(10, 2)) for c in ((0, 0), (4, 0), (0, 4))])
    y = np.repeat([0, 1, 2], 10)
    perm = np.array([2, 0, 1])
    a = predict(train(X, y), X)
    b = predict(train(X, perm[y]), X)
    assert np.array_equal(perm[a], b)


def test_gradient_matches_central_differences(rng):
    X = rng.normal(size=(30, 4))
    y = rng.integers(0, 3, size=30)
    for _ in range(5):
        W = rng.normal(size=(3, 4))
        b = rng.normal(size=3)
        _, (gW, gb) = loss_and_gradient(W, b, X, y, 15.0)
        nW, nb = numeric_gradient(W, b, X, y, 15.0)
        assert max_rel_error(gW, nW) < 1e-4
        assert max_rel_error(gb, nb) < 1e-4


def test_regulariser_gradient_term(rng):
    # perfectly fit labels: data term almost flat, regulariser dominates dJ/dW
    X = np.array([[10.0, 0.0], [-10.0, 0.0]])
    y = np.array([0, 1])
    W = np.array([[5.0, 1.0], [-5.0, -1.0]])
    b = np.zeros(2)
    c_reg = 0.5
    _, (gW, _) = loss_and_gradient(W, b, X, y, c_reg)
    nW, _ = numeric_gradient(W, b, X, y, c_reg)
    assert max_rel_error(gW, nW) < 1e-4
    np.testing.assert_allclose(gW, W / (c_reg * 2), rtol=1e-6)


def test_uniform_loss_is_log2():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    loss, _ = loss_and_gradient(np.zeros((2, 2)), np.zeros(2), X, np.array([0, 1]), 15.0)
    assert loss == pytest.approx(math.log(2), rel=1e-15)


def test_doubling_c_halves_regulariser(rng):
    X = rng.normal(size=(8, 3))
    y = np.arange(8) % 2
    W, b = rng.normal(size=(2, 3)), rng.normal(size=2)
    data_term, _ = loss_and_gradient(W, b, X, y, 1e300)
    l1, _ = loss_and_gradient(W, b, X, y, 2.0)
    l2, _ = loss_and_gradient(W, b, X, y, 4.0)
    assert (l2 - data_term) == pytest.approx((l1 - data_term) / 2, rel=1e-10)


def test_predict_proba_uniform_and_stable():
    m = LogRegModel(np.zeros((4, 3)), np.zeros(4))
    np.testing.assert_array_equal(predict_proba(m, np.ones(3)), [0.25] * 4)
    assert predict(m, np.ones(3)) == 0
    big = LogRegModel(np.zeros((2, 1)), np.array([1000.0, 0.0]))
    p = predict_proba(big, [0.0])
    assert np.all(np.isfinite(p))
    assert p[0] == pytest.approx(1.0) and p[1] == pytest.approx(0.0, abs=1e-300)


def test_predict_proba_matches_high_precision(rng):
    mpmath.mp.dps = 50
    for _ in range(20):
        W, b, x = rng.normal(size=(5, 6)) * 3, rng.normal(size=5), rng.normal(size=6)
        p = predict_proba(LogRegModel(W, b), x)
        logits = [mpmath.fsum(mpmath.mpf(float(W[k, j])) * mpmath.mpf(float(x[j]))
                              for j in range(6)) + mpmath.mpf(float(b[k])) for k in range(5)]
        z = mpmath.fsum(mpmath.exp(v) for v in logits)
        ref = [float(mpmath.exp(v) / z) for v in logits]
        np.testing.assert_allclose(p, ref, rtol=0, atol=1e-9)


def test_predict_equals_argmax(rng):
    m = LogRegModel(rng.normal(size=(4, 3)), rng.normal(size=4))
    X = rng.normal(size=(50, 3))
    assert np.array_equal(predict(m, X), np.argmax(predict_proba(m, X), axis=1))


@settings(max_examples=200, deadline=None)
@given(hnp.arrays(np.float64, 4, elements=st.floats(-1e6, 1e6)))
def test_probabilities_on_simplex(x):
    m = LogRegModel(np.random.default_rng(0).normal(size=(3, 4)), np.zeros(3))
    p = predict_proba(m, x)
    assert np.all(p >= 0) and abs(p.sum() - 1.0) <= 1e-9


def test_loss_monotone_and_deterministic(rng):
    X = rng.normal(size=(40, 5))
    y = rng.integers(0, 4, size=40)
    y[:4] = [0, 1, 2, 3]
    m1 = train(X, y)
    trace = m1.info["loss_trace"]
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
    m2 = train(X, y)
    assert m1 == m2
    assert m1.weights.tobytes() == m2.weights.tobytes()


def test_training_reaches_stationary_point(rng):
    X = rng.normal(size=(40, 3)) + 20.0  # offset data to exercise centring
    y = rng.integers(0, 3, size=40)
    y[:3] = [0, 1, 2]
    m = train(X, y, TrainOptions(c_reg=1.0, max_iters=2000, tol=1e-8))
    assert m.info["converged"]
    _, (gW, gb) = loss_and_gradient(m.weights, m.biases, X, y, 1.0)
    assert max(np.abs(gW).max(), np.abs(gb).max()) < 1e-6


def test_non_convergence_is_flagged_not_raised(rng):
    X, y = two_blobs(rng)
    m = train(X, y, TrainOptions(max_iters=1))
    assert m.info["iterations"] == 1 and not m.info["converged"]


def test_training_errors(rng):
    X = rng.normal(size=(4, 2))
    with pytest.raises(MissingClass):
        train(X, np.array([0, 0, 2, 2]))
    with pytest.raises(MissingClass):
        train(X, np.zeros(4, dtype=int))
    bad = X.copy()
    bad[0, 0] = np.inf
    with pytest.raises(NonFiniteInput):
        train(bad, np.array([0, 1, 0, 1]))
    m = train(X, np.array([0, 1, 0, 1]))
    with pytest.raises(DimensionMismatch):
        predict_proba(m, np.ones(3))
