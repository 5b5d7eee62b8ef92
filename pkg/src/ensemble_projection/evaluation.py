"""Transductive semi-supervised and self-taught classification harness.

A run draws ``per_class`` labelled samples from every class, trains a
downstream classifier on them and measures precision (fraction correct)
on every remaining sample.  Split ``i`` depends only on the experiment seed
and ``i``, so all feature/classifier arms of one experiment see the same
splits.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ensemble
from .dataset_io import Dataset
from .errors import (DimensionMismatch, InsufficientClassSamples, InsufficientEvaluation,
                     InvalidConfig, LabelsRequired, LengthMismatch)
from .geometry import normalize_rows, pairwise_distances
from .linear_classifier import TrainOptions, predict, train
from .sampling import EPParams, derive_seed

CLASSIFIERS = ("knn1", "logreg")
FEATURES = ("raw", "ep")
# keeps split streams apart from the EP trial streams of the same seed
_SPLIT_SALT = 0x53504C4954000000

PER_CLASS_PRESETS = {
    "scene15": (1, 2, 5, 10, 20, 50, 100),
    "indoor67": (1, 2, 5, 10, 20, 50, 100),
    "landuse21": (1, 2, 5, 10, 20, 30, 50),
    "texture25": (1, 2, 3, 5, 7, 10, 15),
    "building25": (1, 2, 5, 10, 15, 20, 30),
    "event8": (1, 2, 5, 10, 15, 20, 30),
    "caltech101": (1, 2, 5, 10, 15, 20, 30),
    "stl10": (1, 5, 10, 20, 50, 100, 500),
    "desk": (1, 2, 5, 10),
}


@dataclass(frozen=True, eq=False)
class SplitSpec:
    labeled_indices: np.ndarray
    evaluation_indices: np.ndarray
    per_class: int
    run_seed: int


@dataclass
class ExperimentReport:
    per_run_precision: list
    mean: float
    std: float
    config: dict = field(default_factory=dict)

    @classmethod
    def from_runs(cls, precisions, config) -> "ExperimentReport":
        p = np.asarray(precisions, dtype=np.float64)
        return cls([float(v) for v in p], float(p.mean()), float(p.std()), dict(config))

    def to_dict(self) -> dict:
        return {"config": self.config, "per_run_precision": self.per_run_precision,
                "mean": self.mean, "std": self.std}


def split_seed(seed: int, run: int) -> int:
    return derive_seed(int(seed) ^ _SPLIT_SALT, run)


def make_split(labels, per_class: int, seed: int) -> SplitSpec:
    """Draw ``per_class`` labelled indices per class, uniformly without replacement."""
    labels = np.asarray(labels)
    if per_class < 1:
        raise InvalidConfig(f"per_class must be >= 1, got {per_class}")
    rng = np.random.default_rng(seed)
    chosen = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if members.size < per_class:
            raise InsufficientClassSamples(
                f"class {c} has {members.size} samples, {per_class} requested"
            )
        chosen.append(rng.choice(members, size=per_class, replace=False))
    labeled = np.sort(np.concatenate(chosen))
    rest = np.setdiff1d(np.arange(labels.size), labeled)
    if rest.size == 0:
        raise InsufficientEvaluation("no samples left for evaluation")
    return SplitSpec(labeled, rest, per_class, seed)


def knn_classify(train_feats, train_labels, test_feats, k: int = 1) -> np.ndarray:
    """Majority label among the ``k`` nearest training rows.

    Equal distances are ordered by training index; equal vote counts go to
    the lowest class id.  ``k`` larger than the training set uses all rows.
    """
    train_feats = np.asarray(train_feats, dtype=np.float64)
    test_feats = np.asarray(test_feats, dtype=np.float64)
    train_labels = np.asarray(train_labels, dtype=np.int64)
    if k < 1:
        raise InvalidConfig(f"k must be >= 1, got {k}")
    if train_feats.shape[0] == 0 or train_labels.shape != (train_feats.shape[0],):
        raise LengthMismatch("training features and labels disagree or are empty")
    if test_feats.ndim != 2 or test_feats.shape[1] != train_feats.shape[1]:
        raise DimensionMismatch(f"test dims {test_feats.shape}, train dims {train_feats.shape}")
    D = pairwise_distances(test_feats, train_feats)
    nearest = np.argsort(D, axis=1, kind="stable")[:, :k]
    n_classes = int(train_labels.max()) + 1
    votes = np.zeros((test_feats.shape[0], n_classes), dtype=np.int64)
    np.add.at(votes, (np.arange(test_feats.shape[0])[:, None], train_labels[nearest]), 1)
    return np.argmax(votes, axis=1)


def precision(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.shape} predictions for {truth.shape} labels")
    if pred.size == 0:
        raise InsufficientEvaluation("precision of an empty set")
    return float(np.mean(pred == truth))


def classify(classifier: str, train_feats, train_labels, test_feats, n_classes: int,
             c_reg: float = 15.0) -> np.ndarray:
    if classifier == "knn1":
        return knn_classify(train_feats, train_labels, test_feats, k=1)
    if classifier == "logreg":
        model = train(train_feats, train_labels, TrainOptions(c_reg=c_reg), n_classes=n_classes)
        return np.atleast_1d(predict(model, test_feats))
    raise InvalidConfig(f"unknown classifier {classifier!r}; expected one of {CLASSIFIERS}")


def evaluate_features(F, labels, n_classes: int, per_class: int, runs: int, classifier: str,
                      seed: int, c_reg: float = 15.0, threads: int = 1, config=None) -> ExperimentReport:
    """Repeated split / train / score loop on a fixed representation ``F``."""
    if runs < 1:
        raise InvalidConfig(f"runs must be >= 1, got {runs}")
    if classifier not in CLASSIFIERS:
        raise InvalidConfig(f"unknown classifier {classifier!r}; expected one of {CLASSIFIERS}")
    labels = np.asarray(labels)

    def one_run(i):
        split = make_split(labels, per_class, split_seed(seed, i))
        pred = classify(classifier, F[split.labeled_indices], labels[split.labeled_indices],
                        F[split.evaluation_indices], n_classes, c_reg)
        return precision(pred, labels[split.evaluation_indices])

    # validates feasibility once before any worker starts
    make_split(labels, per_class, split_seed(seed, 0))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_run, range(runs)))
    else:
        results = [one_run(i) for i in range(runs)]
    cfg = {"classifier": classifier, "per_class": per_class, "runs": runs, "seed": seed,
           "c_reg": c_reg}
    cfg.update(config or {})
    return ExperimentReport.from_runs(results, cfg)


def _require_labels(d: Dataset) -> None:
    if not d.has_labels:
        raise LabelsRequired("evaluation needs a labelled dataset")


def ep_features(model, X, normalize: str = "none") -> np.ndarray:
    return normalize_rows(ensemble.project_all(model, X), normalize)


def run_semi_supervised(d: Dataset, params: EPParams, per_class: int, runs: int = 5,
                        classifier: str = "logreg", feature: str = "ep", seed: int | None = None,
                        c_reg: float = 15.0, threads: int = 1, ep_normalize: str = "none",
                        model=None) -> ExperimentReport:
    """Transductive protocol: EP is fitted once on all of ``d`` with labels stripped."""
    _require_labels(d)
    if feature not in FEATURES:
        raise InvalidConfig(f"unknown feature {feature!r}; expected one of {FEATURES}")
    seed = params.seed if seed is None else seed
    config = {"mode": "semi_supervised", "feature": feature}
    if feature == "ep":
        if model is None:
            model = ensemble.fit(d.without_labels(), params, threads=threads)
        F = ep_features(model, d.features, ep_normalize)
        config.update(ep_params=params.to_dict(), ep_normalize=ep_normalize)
    else:
        F = d.features
    return evaluate_features(F, d.labels, d.n_classes, per_class, runs, classifier, seed,
                             c_reg, threads, config)


def run_self_taught(pool: Dataset, target: Dataset, params: EPParams, per_class: int,
                    runs: int = 5, classifier: str = "logreg", seed: int | None = None,
                    c_reg: float = 15.0, threads: int = 1, ep_normalize: str = "none",
                    model=None) -> ExperimentReport:
    """EP fitted on ``pool`` only, then the transductive loop on projected ``target``."""
    _require_labels(target)
    if pool.n_dims != target.n_dims:
        raise DimensionMismatch(f"pool has {pool.n_dims} dims, target {target.n_dims}")
    seed = params.seed if seed is None else seed
    if model is None:
        model = ensemble.fit(pool.without_labels(), params, threads=threads)
    F = ep_features(model, target.features, ep_normalize)
    config = {"mode": "self_taught", "feature": "ep", "pool_size": pool.n_samples,
              "ep_params": params.to_dict(), "ep_normalize": ep_normalize}
    return evaluate_features(F, target.labels, target.n_classes, per_class, runs, classifier,
                             seed, c_reg, threads, config)
