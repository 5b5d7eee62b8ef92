"""Ensemble Projection: ``T`` prototype-set classifiers whose stacked
probability outputs form the learned representation.

Model file layout (``EPM1``, all little-endian)::

    b"EPM1"
    uint64  T, r, n, m, seed, source_dims
    float64 c_reg
    uint64  max_iters
    float64 tol
    T x { float64[r * source_dims] weights (row-major), float64[r] biases }
"""
from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset_io import Dataset, as_feature_matrix
from .errors import DimensionMismatch, FormatError, InvalidParams, IoError
from .linear_classifier import LogRegModel, predict_proba, train
from .sampling import EPParams, max_min_sample, trial_rng

EPM_MAGIC = b"EPM1"
_HEADER = struct.Struct("<4sQQQQQQdQd")


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    projections: tuple
    params: EPParams
    source_dims: int

    def __post_init__(self):
        object.__setattr__(self, "projections", tuple(self.projections))
        if len(self.projections) != self.params.T:
            raise InvalidParams(f"{len(self.projections)} projections for T={self.params.T}")
        for phi in self.projections:
            if phi.n_classes != self.params.r or phi.n_dims != self.source_dims:
                raise InvalidParams(
                    f"projection of shape {phi.weights.shape}, expected ({self.params.r}, {self.source_dims})"
                )

    @property
    def output_dims(self) -> int:
        return self.params.T * self.params.r

    def __eq__(self, other):
        if not isinstance(other, EnsembleModel):
            return NotImplemented
        return (self.params == other.params and self.source_dims == other.source_dims
                and all(a == b for a, b in zip(self.projections, other.projections)))

    __hash__ = None


def _features_of(d) -> np.ndarray:
    # labels are never looked at: fitting is unsupervised
    if isinstance(d, Dataset):
        return d.features
    return as_feature_matrix(d)


def fit_trial(X: np.ndarray, params: EPParams, t: int) -> LogRegModel:
    """Sample prototype set ``t`` and train its projection function."""
    pset = max_min_sample(X, params, trial_rng(params.seed, t))
    return train(X[pset.members], pset.pseudo_labels, params.train_options(), n_classes=params.r)


def fit(d, params: EPParams, threads: int = 1) -> EnsembleModel:
    """Fit ``params.T`` projection functions on the features of ``d``.

    Each trial draws from its own RNG stream derived from ``params.seed``
    and the trial index, so the result does not depend on ``threads``.
    """
    X = _features_of(d)
    params.check_for(X.shape[0])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            projections = list(pool.map(lambda t: fit_trial(X, params, t), range(params.T)))
    else:
        projections = [fit_trial(X, params, t) for t in range(params.T)]
    return EnsembleModel(tuple(projections), params, X.shape[1])


def project_all(model: EnsembleModel, m_feat) -> np.ndarray:
    X = np.asarray(m_feat, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.source_dims:
        raise DimensionMismatch(f"input of shape {X.shape}, model expects {model.source_dims} dims")
    return np.hstack([predict_proba(phi, X) for phi in model.projections])


def project(model: EnsembleModel, x) -> np.ndarray:
    """EP feature of one vector: per-trial probabilities concatenated in trial order."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {x.shape}")
    return project_all(model, x[None, :])[0]


def encode_model(model: EnsembleModel) -> bytes:
    p = model.params
    parts = [_HEADER.pack(EPM_MAGIC, p.T, p.r, p.n, p.m, p.seed, model.source_dims,
                          p.c_reg, p.max_iters, p.tol)]
    for phi in model.projections:
        parts.append(np.ascontiguousarray(phi.weights, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(phi.biases, dtype="<f8").tobytes())
    return b"".join(parts)


def decode_model(data: bytes) -> EnsembleModel:
    if len(data) < _HEADER.size:
        raise FormatError("model file truncated in header")
    magic, T, r, n, m, seed, dims, c_reg, max_iters, tol = _HEADER.unpack_from(data)
    if magic != EPM_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {EPM_MAGIC!r}")
    block = r * (dims + 1)
    expected = _HEADER.size + 8 * T * block
    if len(data) != expected:
        raise FormatError(f"model payload is {len(data)} bytes, expected {expected}")
    try:
        params = EPParams(T=T, r=r, n=n, m=m, seed=seed, c_reg=c_reg, max_iters=max_iters, tol=tol)
    except InvalidParams as exc:
        raise FormatError(f"invalid parameters in model header: {exc}") from None
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(np.float64).reshape(T, block)
    projections = [LogRegModel(v[:r * dims].reshape(r, dims), v[r * dims:]) for v in values]
    return EnsembleModel(tuple(projections), params, dims)


def save_model(model: EnsembleModel, path) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(encode_model(model))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def load_model(path) -> EnsembleModel:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return decode_model(data)
