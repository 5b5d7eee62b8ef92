"""Euclidean distances and exact brute-force nearest-neighbour queries."""
from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import DegenerateSet, DimensionMismatch, IndexOutOfRange, InvalidN

class DistanceMetric(str, Enum):
    EUCLIDEAN = "euclidean"


def _check_metric(metric) -> None:
    if DistanceMetric(metric) is not DistanceMetric.EUCLIDEAN:
        raise ValueError(f"unsupported metric {metric!r}")


def distance(a, b, metric=DistanceMetric.EUCLIDEAN) -> float:
    _check_metric(metric)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"vectors of shape {a.shape} and {b.shape}")
    diff = np.abs(a - b)
    scale = diff.max() if diff.size else 0.0
    if scale == 0.0:
        return 0.0
    # rescale so tiny non-zero differences do not underflow to 0
    diff = diff / scale
    return float(scale * np.sqrt(np.dot(diff, diff)))


def _sq_sum_columns(columns) -> np.ndarray:
    # left-to-right over dimensions, so every code path ranks near-ties alike
    acc = None
    for col in columns:
        sq = col * col
        acc = sq if acc is None else acc + sq
    return acc


def distances_to(X: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Distance from every row of ``X`` to the vector ``x``."""
    X = np.asarray(X, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if X.shape[1] == 0:
        return np.zeros(X.shape[0])
    return np.sqrt(_sq_sum_columns(X[:, k] - x[k] for k in range(X.shape[1])))


def pairwise_distances(A: np.ndarray, B: np.ndarray | None = None) -> np.ndarray:
    """Dense ``len(A) x len(B)`` distance matrix.

    Computed from explicit differences rather than the ``|a|^2 + |b|^2 - 2ab``
    expansion so that identical rows are at distance exactly 0 and tie
    structure is preserved.  Squared differences are accumulated one
    dimension at a time, in order.
    """
    A = np.asarray(A, dtype=np.float64)
    B = A if B is None else np.asarray(B, dtype=np.float64)
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"{A.shape[1]} vs {B.shape[1]} dims")
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[0]))
    At, Bt = np.ascontiguousarray(A.T), np.ascontiguousarray(B.T)
    return np.sqrt(_sq_sum_columns(At[k][:, None] - Bt[k][None, :] for k in range(A.shape[1])))


def avg_pairwise_distance(indices, m: np.ndarray) -> float:
    """Mean distance over all unordered pairs of distinct members of ``indices``."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1 or idx.size < 2:
        raise DegenerateSet(f"need at least 2 indices, got {idx.size}")
    if idx.min() < 0 or idx.max() >= m.shape[0]:
        raise IndexOutOfRange(f"index outside [0, {m.shape[0]})")
    D = pairwise_distances(m[idx])
    iu = np.triu_indices(idx.size, k=1)
    return float(D[iu].mean())


def rank_order(dists: np.ndarray) -> np.ndarray:
    """Indices sorted by (distance, index)."""
    return np.argsort(dists, kind="stable")


def nearest_neighbors(query_index: int, m: np.ndarray, n: int) -> np.ndarray:
    """The ``n`` rows closest to row ``query_index``, the query itself included.

    Ordered by ascending distance, ties broken by ascending row index.
    """
    n_samples = m.shape[0]
    if not 0 <= query_index < n_samples:
        raise IndexOutOfRange(f"query {query_index} outside [0, {n_samples})")
    if not 1 <= n <= n_samples:
        raise InvalidN(f"n={n} must lie in [1, {n_samples}]")
    d = distances_to(m, m[query_index])
    order = rank_order(d)[:n]
    if order[0] != query_index:
        # duplicates of the query at distance 0 with a lower index; self goes first
        order = np.concatenate(([query_index], order[order != query_index]))[:n]
    return order


def normalize_rows(X: np.ndarray, kind: str = "none") -> np.ndarray:
    """Optional per-row preprocessing: ``"none"`` or ``"l2"`` (unit Euclidean norm)."""
    if kind == "none":
        return X
    if kind != "l2":
        raise ValueError(f"unknown normalization {kind!r}")
    norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    return X / np.where(norms > 0, norms, 1.0)[:, None]
