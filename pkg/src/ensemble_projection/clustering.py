"""k-means (k-means++ seeding, Lloyd iterations) and purity scoring."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ensemble
from .dataset_io import Dataset, as_feature_matrix
from .errors import InvalidConfig, InvalidK, LabelsRequiredForPurity, LengthMismatch
from .geometry import normalize_rows
from .sampling import EPParams, derive_seed

_RESTART_SALT = 0x4B4D45414E530000


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    assignments: np.ndarray
    k: int
    inertia: float
    iterations: int
    centroids: np.ndarray
    inertia_trace: list = field(default_factory=list)


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    out = np.empty((X.shape[0], C.shape[0]))
    for c in range(C.shape[0]):
        diff = X - C[c]
        out[:, c] = np.einsum("ij,ij->i", diff, diff)
    return out


def kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of ``k`` initial centres drawn by D^2 weighting."""
    N = X.shape[0]
    chosen = [int(rng.integers(N))]
    closest = np.einsum("ij,ij->i", X - X[chosen[0]], X - X[chosen[0]])
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(N, p=closest / total))
        else:
            # every point coincides with a centre; fall back to an unused index
            free = np.setdiff1d(np.arange(N), chosen)
            nxt = int(rng.choice(free))
        chosen.append(nxt)
        diff = X - X[nxt]
        closest = np.minimum(closest, np.einsum("ij,ij->i", diff, diff))
    return np.array(chosen)


def _assign(X, centroids):
    D = _sq_dists(X, centroids)
    labels = np.argmin(D, axis=1)
    k = centroids.shape[0]
    forced = {}
    # empty-cluster repair: move the centre onto the point farthest from its own centre
    for c in range(k):
        if np.any(labels == c):
            continue
        own = D[np.arange(X.shape[0]), labels]
        counts = np.bincount(labels, minlength=k)
        own = np.where(counts[labels] > 1, own, -1.0)
        far = int(np.argmax(own))
        centroids[c] = X[far]
        D[:, c] = np.einsum("ij,ij->i", X - X[far], X - X[far])
        labels = np.argmin(D, axis=1)
        # coincident points tie on distance; keep moved centres non-empty
        forced[far] = c
        for i, cc in forced.items():
            labels[i] = cc
    inertia = float(D[np.arange(X.shape[0]), labels].sum())
    return labels, inertia


def _lloyd(X, centroids, max_iters):
    labels, inertia = _assign(X, centroids)
    trace = [inertia]
    it = 0
    while it < max_iters:
        it += 1
        k = centroids.shape[0]
        for c in range(k):
            centroids[c] = X[labels == c].mean(axis=0)
        new_labels, inertia = _assign(X, centroids)
        trace.append(inertia)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels, trace[-1], it, centroids, trace


def kmeans(m_feat, k: int, max_iters: int = 300, restarts: int = 10, seed: int = 0) -> ClusteringResult:
    """Best of ``restarts`` k-means runs by inertia (first run wins ties)."""
    X = as_feature_matrix(m_feat)
    N = X.shape[0]
    if not 1 <= k <= N:
        raise InvalidK(f"k={k} must lie in [1, {N}]")
    if restarts < 1 or max_iters < 1:
        raise InvalidConfig("restarts and max_iters must be >= 1")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(derive_seed(int(seed) ^ _RESTART_SALT, r))
        centroids = X[kmeans_pp_init(X, k, rng)].copy()
        labels, inertia, iters, centroids, trace = _lloyd(X, centroids, max_iters)
        if best is None or inertia < best.inertia:
            best = ClusteringResult(labels, k, inertia, iters, centroids, trace)
    return best


def purity(assignments, true_labels) -> float:
    """Fraction of samples that belong to the dominant class of their cluster."""
    a = np.asarray(assignments)
    t = np.asarray(true_labels)
    if a.shape != t.shape or a.ndim != 1:
        raise LengthMismatch(f"{a.shape} assignments for {t.shape} labels")
    if a.size == 0:
        raise LengthMismatch("purity of an empty assignment")
    _, ai = np.unique(a, return_inverse=True)
    _, ti = np.unique(t, return_inverse=True)
    table = np.zeros((ai.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, ti), 1)
    return float(table.max(axis=1).sum() / a.size)


@dataclass
class ClusteringReport:
    feature: str
    k: int
    per_seed_purity: list
    mean_purity: float
    config: dict = field(default_factory=dict)
    assignments: np.ndarray | None = None  # of the first seed

    def to_dict(self) -> dict:
        return {"config": self.config, "feature": self.feature, "k": self.k,
                "per_seed_purity": self.per_seed_purity, "mean_purity": self.mean_purity}


def run_clustering_experiment(d: Dataset, params: EPParams, feature: str = "ep",
                              restarts: int = 10, seeds: int = 1, k: int | None = None,
                              max_iters: int = 300, threads: int = 1, model=None,
                              ep_normalize: str = "none") -> ClusteringReport:
    """Cluster raw or EP features with ``k = C`` and score purity.

    Labels are used for purity only.  With ``seeds > 1`` k-means is repeated
    with seeds derived from ``params.seed`` and the purities averaged.
    """
    if not d.has_labels:
        raise LabelsRequiredForPurity("purity needs ground-truth labels")
    if feature not in ("raw", "ep"):
        raise InvalidConfig(f"unknown feature {feature!r}")
    k = d.n_classes if k is None else k
    config = {"mode": "clustering", "feature": feature, "restarts": restarts, "seeds": seeds,
              "max_iters": max_iters, "seed": params.seed}
    if feature == "ep":
        if model is None:
            model = ensemble.fit(d.without_labels(), params, threads=threads)
        F = normalize_rows(ensemble.project_all(model, d.features), ep_normalize)
        config.update(ep_params=params.to_dict(), ep_normalize=ep_normalize)
    else:
        F = d.features
    purities = []
    first = None
    for s in range(seeds):
        res = kmeans(F, k, max_iters=max_iters, restarts=restarts, seed=derive_seed(params.seed, s))
        purities.append(purity(res.assignments, d.labels))
        if first is None:
            first = res.assignments
    return ClusteringReport(feature, k, purities, float(np.mean(purities)), config, first)
