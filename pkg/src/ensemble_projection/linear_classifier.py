"""L2-regularised multinomial logistic regression.

Objective, for ``N`` samples and ``K`` classes::

    J(W, b) = (1/N) sum_i -log softmax(W x_i + b)[y_i] + ||W||_F^2 / (2 C N)

Biases are not regularised.  Training is full-batch and deterministic:
zero initialisation, limited-memory BFGS directions (gradient-only
information) and an Armijo backtracking line search, so the loss never
increases between iterations.  Inputs are centred internally; since the
bias is free this leaves the objective unchanged and only removes the
bias/weight coupling that otherwise makes the problem badly conditioned.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidParams, MissingClass, NonFiniteInput


@dataclass(frozen=True)
class TrainOptions:
    c_reg: float = 15.0
    max_iters: int = 500
    tol: float = 1e-6
    history: int = 10

    def __post_init__(self):
        if not self.c_reg > 0:
            raise InvalidParams(f"c_reg must be positive, got {self.c_reg}")
        if self.max_iters < 1:
            raise InvalidParams(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise InvalidParams(f"tol must be positive, got {self.tol}")
        if self.history < 1:
            raise InvalidParams(f"history must be >= 1, got {self.history}")


@dataclass(frozen=True, eq=False)
class LogRegModel:
    weights: np.ndarray  # (K, d)
    biases: np.ndarray  # (K,)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        W = np.array(self.weights, dtype=np.float64)
        b = np.array(self.biases, dtype=np.float64)
        if W.ndim != 2 or b.shape != (W.shape[0],):
            raise DimensionMismatch(f"weights {W.shape} and biases {b.shape} disagree")
        if W.shape[0] < 2:
            raise InvalidParams("need at least two classes")
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise NonFiniteInput("model parameters must be finite")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "biases", b)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_dims(self) -> int:
        return self.weights.shape[1]

    def __eq__(self, other):
        if not isinstance(other, LogRegModel):
            return NotImplemented
        return (np.array_equal(self.weights, other.weights)
                and np.array_equal(self.biases, other.biases))

    __hash__ = None


def _log_softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=-1, keepdims=True)
    return Z - np.log(np.exp(Z).sum(axis=-1, keepdims=True))


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    E = np.exp(Z - Z.max(axis=-1, keepdims=True))
    return E / E.sum(axis=-1, keepdims=True)


def loss_and_gradient(W, b, X, y, c_reg: float):
    """Objective value and its gradient ``(dJ/dW, dJ/db)``."""
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    N = X.shape[0]
    if X.ndim != 2 or W.ndim != 2 or W.shape[1] != X.shape[1]:
        raise DimensionMismatch(f"X {X.shape} incompatible with W {W.shape}")
    if b.shape != (W.shape[0],) or y.shape != (N,):
        raise DimensionMismatch("bias or label shape mismatch")
    logp = _log_softmax(X @ W.T + b)
    rows = np.arange(N)
    loss = -logp[rows, y].sum() / N + np.sum(W * W) / (2.0 * c_reg * N)
    R = np.exp(logp)
    R[rows, y] -= 1.0
    gW = R.T @ X / N + W / (c_reg * N)
    gb = R.sum(axis=0) / N
    return float(loss), (gW, gb)


def _validate_training_data(X, y, n_classes):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-D, got {X.shape}")
    if y.shape != (X.shape[0],):
        raise DimensionMismatch(f"{y.shape[0]} labels for {X.shape[0]} samples")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("training features contain NaN or Inf")
    if y.size == 0:
        raise MissingClass("empty training set")
    y = y.astype(np.int64)
    K = int(y.max()) + 1 if n_classes is None else int(n_classes)
    if K < 2:
        raise MissingClass("need at least two classes")
    if y.min() < 0 or y.max() >= K:
        raise InvalidParams(f"labels outside [0, {K})")
    present = np.bincount(y, minlength=K)
    if np.any(present == 0):
        raise MissingClass(f"classes {np.flatnonzero(present == 0).tolist()} absent from y")
    return X, y, K


def train(X, y, opts: TrainOptions | None = None, n_classes: int | None = None) -> LogRegModel:
    """Fit the regularised softmax model.

    Stops when the max-norm of the gradient (taken in the centred
    parametrisation) drops to ``opts.tol`` or after
    ``opts.max_iters`` iterations.  Running out of iterations is reported
    through ``model.info["converged"]`` rather than raised.
    """
    opts = opts or TrainOptions()
    X, y, K = _validate_training_data(X, y, n_classes)
    N, d = X.shape
    # b = b_centred - W mu
    mu = X.mean(axis=0)
    X = X - mu

    def fg(theta):
        W = theta[:K * d].reshape(K, d)
        f, (gW, gb) = loss_and_gradient(W, theta[K * d:], X, y, opts.c_reg)
        return f, np.concatenate([gW.ravel(), gb])

    theta = np.zeros(K * (d + 1))
    f, g = fg(theta)
    trace = [f]
    pairs: deque = deque(maxlen=opts.history)
    converged = False
    stalled = False
    it = 0
    while True:
        if np.max(np.abs(g)) <= opts.tol:
            converged = True
            break
        if it >= opts.max_iters:
            break
        it += 1
        direction = -_two_loop(g, pairs)
        slope = float(g @ direction)
        if slope >= 0:
            direction = -g
            slope = -float(g @ g)
        step = 1.0 if pairs else min(1.0, 1.0 / np.sum(np.abs(g)))
        for _ in range(60):
            cand = theta + step * direction
            f_new, g_new = fg(cand)
            if f_new <= f + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            stalled = True
            break
        if not f_new < f:
            # no representable decrease left
            stalled = True
            break
        s = cand - theta
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-12 * float(yv @ yv):
            pairs.append((s, yv, 1.0 / sy))
        theta, f, g = cand, f_new, g_new
        trace.append(f)

    info = {
        "converged": converged,
        "stalled": stalled,
        "iterations": it,
        "grad_inf_norm": float(np.max(np.abs(g))),
        "loss": f,
        "loss_trace": trace,
    }
    W = theta[:K * d].reshape(K, d)
    return LogRegModel(W, theta[K * d:] - W @ mu, info)


def _two_loop(g: np.ndarray, pairs) -> np.ndarray:
    """Approximate inverse-Hessian times ``g`` from the stored curvature pairs."""
    q = g.copy()
    alphas = []
    for s, yv, rho in reversed(pairs):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * yv
    if pairs:
        s, yv, _ = pairs[-1]
        q *= float(s @ yv) / float(yv @ yv)
    for (s, yv, rho), a in zip(pairs, reversed(alphas)):
        beta = rho * float(yv @ q)
        q += (a - beta) * s
    return q


def _as_input(model: LogRegModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.n_dims or x.ndim not in (1, 2):
        raise DimensionMismatch(f"input of shape {x.shape} for a {model.n_dims}-dim model")
    return x


def decision_function(model: LogRegModel, x) -> np.ndarray:
    x = _as_input(model, x)
    return x @ model.weights.T + model.biases


def predict_proba(model: LogRegModel, x) -> np.ndarray:
    """Class probabilities for one vector (1-D) or a batch of rows (2-D)."""
    return softmax(decision_function(model, x))


def predict(model: LogRegModel, x):
    """Most probable class; the lowest class id wins ties."""
    p = predict_proba(model, x)
    if p.ndim == 1:
        return int(np.argmax(p))
    return np.argmax(p, axis=1)
