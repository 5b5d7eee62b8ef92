"""Measurement tools for the two observations behind EP.

* ``label_cooccurrence_curve``: how often the k-th nearest neighbour of a
  sample shares its class, for k = 1..k_max.
* ``ensemble_noise_simulation``: majority vote over classifiers trained on
  small, label-corrupted subsamples, as a function of ensemble size.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .dataset_io import Dataset
from .errors import InvalidConfig, InvalidKMax, LabelsRequired
from .geometry import pairwise_distances
from .linear_classifier import TrainOptions, predict, train
from .sampling import derive_seed

_HOLDOUT_SALT = 0x484F4C444F555400
RELABEL_MODES = ("other", "any")


@dataclass(frozen=True)
class CooccurrenceCurve:
    p: np.ndarray  # p[k - 1] for k = 1..k_max
    averaging: str

    @property
    def k_max(self) -> int:
        return self.p.size

    def rows(self):
        return [(k + 1, float(v)) for k, v in enumerate(self.p)]


def neighbor_label_matches(features: np.ndarray, labels: np.ndarray, k_max: int,
                           block: int = 256) -> np.ndarray:
    """Boolean ``(N, k_max)``: does the k-th neighbour (self excluded) share the label?"""
    N = features.shape[0]
    out = np.empty((N, k_max), dtype=bool)
    for start in range(0, N, block):
        stop = min(N, start + block)
        D = pairwise_distances(features[start:stop], features)
        rows = np.arange(stop - start)
        # self sorts last so equal-distance duplicates keep their index order
        D[rows, start + rows] = np.inf
        order = np.argsort(D, axis=1, kind="stable")[:, :k_max]
        out[start:stop] = labels[order] == labels[start:stop, None]
    return out


def label_cooccurrence_curve(d: Dataset, k_max: int, averaging: str = "class") -> CooccurrenceCurve:
    """``p(k)`` averaged per class then over classes (``"class"``), or over all
    samples directly (``"image"``)."""
    if not d.has_labels:
        raise LabelsRequired("co-occurrence needs labels")
    if not 1 <= k_max < d.n_samples:
        raise InvalidKMax(f"k_max={k_max} must lie in [1, {d.n_samples})")
    hits = neighbor_label_matches(d.features, d.labels, k_max).astype(np.float64)
    if averaging == "image":
        p = hits.mean(axis=0)
    elif averaging == "class":
        p = np.mean([hits[d.labels == c].mean(axis=0) for c in np.unique(d.labels)], axis=0)
    else:
        raise InvalidConfig(f"unknown averaging {averaging!r}")
    return CooccurrenceCurve(p, averaging)


@dataclass(frozen=True)
class NoiseSimConfig:
    noise_rate: float = 0.0
    T_max: int = 500
    subsample_fraction: float = 0.3
    train_fraction: float = 0.5
    seed: int = 0
    c_reg: float = 15.0
    relabel: str = "other"

    def __post_init__(self):
        if not 0.0 <= self.noise_rate < 1.0:
            raise InvalidConfig(f"noise_rate must lie in [0, 1), got {self.noise_rate}")
        if self.T_max < 1:
            raise InvalidConfig("T_max must be >= 1")
        if not 0.0 < self.subsample_fraction <= 1.0:
            raise InvalidConfig("subsample_fraction must lie in (0, 1]")
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidConfig("train_fraction must lie in (0, 1)")
        if self.relabel not in RELABEL_MODES:
            raise InvalidConfig(f"relabel must be one of {RELABEL_MODES}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class NoiseCurve:
    noise_rate: float
    T_grid: tuple
    accuracy: tuple

    def rows(self):
        return list(zip(self.T_grid, self.accuracy))


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def corrupt_labels(y, rate: float, n_classes: int, rng: np.random.Generator,
                   mode: str = "other"):
    """Reassign ``round(rate * len(y))`` randomly chosen labels.

    ``mode="other"`` draws the new label uniformly from the other
    ``n_classes - 1`` classes, so exactly that many labels change.
    ``mode="any"`` draws from all classes, so some draws keep their label.
    Returns ``(new_labels, touched_positions)``.
    """
    y = np.array(y, dtype=np.int64)
    count = _round_half_up(rate * y.size)
    pos = rng.choice(y.size, size=count, replace=False)
    if mode == "other":
        if n_classes < 2:
            raise InvalidConfig("relabelling to another class needs at least two classes")
        y[pos] = (y[pos] + rng.integers(1, n_classes, size=count)) % n_classes
    elif mode == "any":
        y[pos] = rng.integers(0, n_classes, size=count)
    else:
        raise InvalidConfig(f"unknown relabel mode {mode!r}")
    return y, np.sort(pos)


def holdout_split(n: int, train_fraction: float, seed: int):
    rng = np.random.default_rng(derive_seed(int(seed) ^ _HOLDOUT_SALT, 0))
    perm = rng.permutation(n)
    n_train = min(n - 1, max(1, _round_half_up(train_fraction * n)))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def _fit_predict(X, y, X_test, c_reg):
    # weak sets may lack some classes; train on those present and map back
    present = np.unique(y)
    if present.size == 1:
        return np.full(X_test.shape[0], present[0])
    model = train(X, np.searchsorted(present, y), TrainOptions(c_reg=c_reg))
    return present[predict(model, X_test)]


def ensemble_noise_simulation(d: Dataset, cfg: NoiseSimConfig, T_grid=(1, 10, 100, 500)) -> NoiseCurve:
    """Majority-vote accuracy on a held-out split after ``T`` weak classifiers.

    Vote ties go to the lowest class id.
    """
    if not d.has_labels:
        raise LabelsRequired("noise simulation needs labels")
    T_grid = tuple(int(t) for t in T_grid)
    if not T_grid or min(T_grid) < 1 or max(T_grid) > cfg.T_max:
        raise InvalidConfig(f"T_grid values must lie in [1, {cfg.T_max}]")
    C = d.n_classes
    train_idx, test_idx = holdout_split(d.n_samples, cfg.train_fraction, cfg.seed)
    X_tr, y_tr = d.features[train_idx], d.labels[train_idx]
    X_te, y_te = d.features[test_idx], d.labels[test_idx]
    sub_size = max(1, _round_half_up(cfg.subsample_fraction * train_idx.size))
    votes = np.zeros((test_idx.size, C), dtype=np.int64)
    wanted = set(T_grid)
    acc_at = {}
    rows = np.arange(test_idx.size)
    for t in range(1, max(T_grid) + 1):
        rng = np.random.default_rng(derive_seed(cfg.seed, t))
        sub = rng.choice(train_idx.size, size=sub_size, replace=False)
        y_noisy, _ = corrupt_labels(y_tr[sub], cfg.noise_rate, C, rng, cfg.relabel)
        votes[rows, _fit_predict(X_tr[sub], y_noisy, X_te, cfg.c_reg)] += 1
        if t in wanted:
            acc_at[t] = float(np.mean(np.argmax(votes, axis=1) == y_te))
    return NoiseCurve(cfg.noise_rate, T_grid, tuple(acc_at[t] for t in T_grid))
