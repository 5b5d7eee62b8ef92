"""Gaussian blob generator used as ground truth in experiments and tests."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .dataset_io import Dataset
from .errors import InvalidSpec


@dataclass(frozen=True)
class BlobSpec:
    n_classes: int = 4
    samples_per_class: int = 50
    n_dims: int = 2
    center_spread: float = 10.0
    within_std: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 1 or self.samples_per_class < 1 or self.n_dims < 1:
            raise InvalidSpec("n_classes, samples_per_class and n_dims must be positive")
        if not self.center_spread > 0:
            raise InvalidSpec("center_spread must be positive")
        # within_std == 0 is allowed as the coincident-points limit
        if not self.within_std >= 0:
            raise InvalidSpec("within_std must be non-negative")
        if self.seed < 0:
            raise InvalidSpec("seed must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


def make_blob_arrays(spec: BlobSpec):
    """``(features, labels, centers)``; rows are grouped by class."""
    rng = np.random.default_rng(spec.seed)
    centers = rng.uniform(0.0, spec.center_spread, size=(spec.n_classes, spec.n_dims))
    labels = np.repeat(np.arange(spec.n_classes), spec.samples_per_class)
    noise = rng.standard_normal((labels.size, spec.n_dims))
    return centers[labels] + spec.within_std * noise, labels, centers


def make_blobs(spec: BlobSpec) -> Dataset:
    X, y, _ = make_blob_arrays(spec)
    return Dataset(X, y, spec.n_classes)
