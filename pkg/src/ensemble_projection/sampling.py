"""Max-Min Sampling of pseudo-labelled prototype sets.

Max step: draw ``m`` random hypotheses of ``r`` distinct sample indices and
keep the one with the largest average pairwise distance (the skeleton).
Min step: grow every skeleton seed into a prototype made of its ``n``
nearest neighbours (itself first); all members share the seed's
pseudo-label.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidParams
from .geometry import avg_pairwise_distance, nearest_neighbors
from .linear_classifier import TrainOptions

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class EPParams:
    """Ensemble Projection hyper-parameters.

    ``T`` prototype sets of ``r`` prototypes with ``n`` members each; the
    skeleton is the best of ``m`` hypotheses.  The remaining fields
    configure the per-trial logistic regression.
    """

    T: int = 100
    r: int = 30
    n: int = 6
    m: int = 50
    seed: int = 0
    c_reg: float = 15.0
    max_iters: int = 500
    tol: float = 1e-6

    def __post_init__(self):
        if self.T < 1 or self.r < 2 or self.n < 1 or self.m < 1:
            raise InvalidParams(
                f"need T>=1, r>=2, n>=1, m>=1; got T={self.T} r={self.r} n={self.n} m={self.m}"
            )
        if not 0 <= self.seed <= _MASK64:
            raise InvalidParams("seed must fit in an unsigned 64-bit integer")
        # validates c_reg / max_iters / tol
        self.train_options()

    @property
    def feature_dims(self) -> int:
        return self.T * self.r

    def train_options(self) -> TrainOptions:
        return TrainOptions(c_reg=self.c_reg, max_iters=self.max_iters, tol=self.tol)

    def check_for(self, n_samples: int) -> None:
        if self.r > n_samples:
            raise InvalidParams(f"r={self.r} exceeds n_samples={n_samples}")
        if self.n > n_samples:
            raise InvalidParams(f"n={self.n} exceeds n_samples={n_samples}")

    def to_dict(self) -> dict:
        return asdict(self)


DESK_PARAMS = dict(T=50, r=10, n=4, m=20)


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Seed for sub-stream ``index``: ``seed XOR splitmix64(index)``."""
    return (int(seed) ^ splitmix64(int(index))) & _MASK64


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, trial))


@dataclass(frozen=True, eq=False)
class PrototypeSet:
    members: np.ndarray  # sample index per member, prototype-major
    pseudo_labels: np.ndarray  # prototype id per member
    r: int
    n: int
    skeleton: np.ndarray

    def prototype(self, k: int) -> np.ndarray:
        return self.members[k * self.n:(k + 1) * self.n]

    def __eq__(self, other):
        if not isinstance(other, PrototypeSet):
            return NotImplemented
        return (self.r == other.r and self.n == other.n
                and np.array_equal(self.members, other.members)
                and np.array_equal(self.pseudo_labels, other.pseudo_labels))

    __hash__ = None


def sample_skeleton(m_feat: np.ndarray, r: int, m: int, rng: np.random.Generator,
                    record: list | None = None) -> np.ndarray:
    """Best of ``m`` uniformly drawn ``r``-subsets by average pairwise distance.

    A later hypothesis replaces the incumbent only when strictly better, so
    the first drawn wins ties.  If ``record`` is a list, every hypothesis is
    appended to it.
    """
    N = m_feat.shape[0]
    if r > N:
        raise InvalidParams(f"r={r} exceeds n_samples={N}")
    if r < 2 or m < 1:
        raise InvalidParams(f"need r>=2 and m>=1, got r={r} m={m}")
    best, best_score = None, -np.inf
    for _ in range(m):
        hyp = rng.choice(N, size=r, replace=False)
        if record is not None:
            record.append(hyp.copy())
        score = avg_pairwise_distance(hyp, m_feat)
        if score > best_score:
            best, best_score = hyp, score
    return best


def expand_prototypes(m_feat: np.ndarray, skeleton, n: int) -> PrototypeSet:
    skeleton = np.asarray(skeleton, dtype=np.int64)
    N = m_feat.shape[0]
    if skeleton.ndim != 1 or skeleton.size < 1:
        raise InvalidParams("skeleton must be a non-empty index list")
    if np.unique(skeleton).size != skeleton.size:
        raise InvalidParams("skeleton indices must be distinct")
    if not 1 <= n <= N:
        raise InvalidParams(f"n={n} must lie in [1, {N}]")
    members = np.concatenate([nearest_neighbors(int(s), m_feat, n) for s in skeleton])
    labels = np.repeat(np.arange(skeleton.size), n)
    return PrototypeSet(members, labels, int(skeleton.size), int(n), skeleton)


def max_min_sample(m_feat: np.ndarray, params: EPParams, rng: np.random.Generator,
                   record: list | None = None) -> PrototypeSet:
    params.check_for(m_feat.shape[0])
    skeleton = sample_skeleton(m_feat, params.r, params.m, rng, record)
    return expand_prototypes(m_feat, skeleton, params.n)
