import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ensemble_projection.errors import DegenerateSet, DimensionMismatch, IndexOutOfRange, InvalidN
from ensemble_projection.geometry import (avg_pairwise_distance, distance, nearest_neighbors,
                                          normalize_rows, pairwise_distances)
from tests import oracles

coords = st.floats(-1e3, 1e3, allow_nan=False)
vec3 = hnp.arrays(np.float64, 3, elements=coords)


def test_distance_basics():
    assert distance([3.1, -2.0], [3.1, -2.0]) == 0.0
    assert distance([0, 0], [3, 4]) == 5.0
    with pytest.raises(DimensionMismatch):
        distance([0, 0], [1, 2, 3])


def test_distance_matches_scalar_loop(rng):
    for _ in range(20):
        a, b = rng.normal(size=10), rng.normal(size=10)
        ref = oracles.dist(a, b)
        assert abs(distance(a, b) - ref) <= 1e-12 * ref


@settings(max_examples=200)
@given(vec3, vec3, vec3)
def test_metric_axioms(a, b, c):
    ab, ba = distance(a, b), distance(b, a)
    assert abs(ab - ba) <= 1e-12 * max(1.0, ab)
    assert distance(a, c) <= ab + distance(b, c) + 1e-9
    assert (ab == 0.0) == bool(np.all(a == b))


def test_pairwise_matrix_has_exact_zero_diagonal(rng):
    X = rng.normal(size=(30, 5)) * 1e3
    D = pairwise_distances(X)
    assert np.all(np.diag(D) == 0.0)
    np.testing.assert_allclose(D, D.T, rtol=1e-12)


def test_avg_pairwise_small_cases():
    X = np.array([[0.0], [2.0], [4.0]])
    assert avg_pairwise_distance([0, 1], X) == 2.0
    assert avg_pairwise_distance([0, 1, 2], X) == pytest.approx((2 + 2 + 4) / 3, rel=1e-15)
    with pytest.raises(DegenerateSet):
        avg_pairwise_distance([1], X)
    with pytest.raises(IndexOutOfRange):
        avg_pairwise_distance([0, 3], X)


def test_avg_pairwise_matches_double_loop(rng):
    for _ in range(20):
        X = rng.normal(size=(12, 4))
        idx = rng.choice(12, size=5, replace=False)
        ref = oracles.avg_pairwise(idx, X)
        assert abs(avg_pairwise_distance(idx, X) - ref) <= 1e-12 * ref


@settings(max_examples=50, deadline=None)
@given(st.permutations(list(range(6))))
def test_avg_pairwise_permutation_invariant(perm):
    X = np.random.default_rng(3).normal(size=(6, 3))
    base = avg_pairwise_distance(list(range(6)), X)
    assert avg_pairwise_distance(perm, X) == pytest.approx(base, rel=1e-12)


def test_nearest_neighbors_examples():
    X = np.array([[0.0], [1.0], [10.0]])
    assert nearest_neighbors(0, X, 1).tolist() == [0]
    assert nearest_neighbors(0, X, 2).tolist() == [0, 1]
    with pytest.raises(InvalidN):
        nearest_neighbors(0, X, 4)
    with pytest.raises(InvalidN):
        nearest_neighbors(0, X, 0)
    with pytest.raises(IndexOutOfRange):
        nearest_neighbors(3, X, 1)


def test_nearest_neighbors_tie_break_and_duplicates():
    X = np.array([[1.0], [0.0], [2.0], [0.0]])
    # rows 0 and 2 tie at distance 1 from row 1; lower index first
    assert nearest_neighbors(1, X, 4).tolist() == [1, 3, 0, 2]
    # row 3 duplicates row 1, the query still comes first
    assert nearest_neighbors(3, X, 3).tolist() == [3, 1, 0]


def test_nearest_neighbors_matches_full_sort(rng):
    X = rng.normal(size=(50, 8))
    for q in range(0, 50, 7):
        assert nearest_neighbors(q, X, 7).tolist() == oracles.knn_indices(X, q, 7)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 29), st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_nearest_neighbors_invariants(q, n, seed):
    X = np.round(np.random.default_rng(seed).normal(size=(30, 2)), 1)  # rounding makes ties
    out = nearest_neighbors(q, X, n).tolist()
    assert out[0] == q
    assert len(set(out)) == n
    keys = [(oracles.dist(X[q], X[j]), j != q, j) for j in out]
    assert keys == sorted(keys)


def test_normalize_rows():
    X = np.array([[3.0, 4.0], [0.0, 0.0]])
    np.testing.assert_allclose(normalize_rows(X, "l2"), [[0.6, 0.8], [0.0, 0.0]])
    assert normalize_rows(X, "none") is X
    with pytest.raises(ValueError):
        normalize_rows(X, "max")


def test_triangle_inequality_random_triples(rng):
    X = rng.normal(size=(15, 6))
    for i, j, k in itertools.combinations(range(15), 3):
        assert distance(X[i], X[k]) <= distance(X[i], X[j]) + distance(X[j], X[k]) + 1e-12
