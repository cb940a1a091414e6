"""First-order optimization of ||A W|| with orthonormal-column constraint.

The constraint surface is the unit sphere when W has one column and the
Stiefel manifold otherwise.  Two update rules are provided: Riemannian
gradient descent and a Riemannian Adagrad variant (per-entry squared
gradient accumulator applied before tangent projection).  Everything is
full-batch and deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "OptimizerConfig",
    "OptimizationTrace",
    "RetractionSingularError",
    "DivergenceError",
    "tangent_project",
    "retract",
    "random_orthonormal",
    "minimize",
    "minimize_affine_target",
]

ORTHONORMALITY_TOL = 1e-8


class RetractionSingularError(np.linalg.LinAlgError):
    """W + T was rank deficient, no QR retraction exists."""


class DivergenceError(FloatingPointError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int):
        super().__init__(f"non-finite loss at epoch {epoch}")
        self.epoch = epoch


@dataclass
class OptimizerConfig:
    algorithm: str = "riemannian-adagrad"
    loss: str = "mean-absolute"
    learning_rate: float = 0.01
    epochs: int = 5000
    seed: int = 0
    adagrad_epsilon: float = 1e-10

    def __post_init__(self):
        if self.algorithm not in ("riemannian-sgd", "riemannian-adagrad"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.loss not in ("mean-absolute", "mean-squared"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.adagrad_epsilon <= 0:
            raise ValueError("adagrad_epsilon must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerConfig":
        known = {
            k: d[k]
            for k in (
                "algorithm",
                "loss",
                "learning_rate",
                "epochs",
                "seed",
                "adagrad_epsilon",
            )
            if k in d
        }
        return cls(**known)


@dataclass
class OptimizationTrace:
    losses: list = field(default_factory=list)
    final_loss: float = np.inf


def tangent_project(W: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Project G onto the tangent space of the Stiefel manifold at W."""
    WtG = W.T @ G
    return G - W @ ((WtG + WtG.T) / 2.0)


def retract(W: np.ndarray, T: np.ndarray) -> np.ndarray:
    """QR retraction of W + T, with R's diagonal forced positive."""
    Q, R = np.linalg.qr(W + T)
    diag = np.diag(R)
    if np.any(np.abs(diag) < 1e-12 * max(1.0, np.abs(diag).max(initial=0.0))):
        raise RetractionSingularError("W + T is rank deficient")
    signs = np.where(diag < 0, -1.0, 1.0)
    return Q * signs


def random_orthonormal(p: int, q: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded standard-normal p x q matrix orthonormalized by QR."""
    return retract(np.zeros((p, q)), rng.standard_normal((p, q)))


def _fix_column_signs(W: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    W = W.copy()
    for j in range(W.shape[1]):
        k = np.argmax(np.abs(W[:, j]))
        if W[k, j] < 0:
            W[:, j] = -W[:, j]
    return W


def minimize(
    A: np.ndarray,
    q: int,
    config: OptimizerConfig,
    W0: np.ndarray | None = None,
) -> tuple[np.ndarray, OptimizationTrace]:
    """Minimize loss(A W, 0) over p x q matrices with orthonormal columns.

    Returns the sign-normalized solution and the per-epoch loss trace; the
    trace's final_loss is recomputed at the returned point.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("A must be finite")
    rows, p = A.shape
    if not 1 <= q <= p:
        raise ValueError(f"need 1 <= q <= {p}, got q={q}")

    mse = config.loss == "mean-squared"
    scale = rows * q
    gram = (A.T @ A) if mse else None

    def loss_and_grad(W):
        if mse:
            GW = gram @ W
            # roundoff can push an exactly-zero quadratic form slightly negative
            return max(float(np.sum(W * GW)) / scale, 0.0), (2.0 / scale) * GW
        res = A @ W
        return float(np.abs(res).sum()) / scale, (A.T @ np.sign(res)) / scale

    if W0 is None:
        W = random_orthonormal(p, q, np.random.default_rng(config.seed))
    else:
        W = np.array(W0, dtype=float)
        if W.shape != (p, q):
            raise ValueError("W0 has wrong shape")

    lr = config.learning_rate
    acc = np.zeros((p, q))
    trace = OptimizationTrace()
    for epoch in range(config.epochs):
        loss, g = loss_and_grad(W)
        if not np.isfinite(loss):
            raise DivergenceError(epoch)
        trace.losses.append(loss)
        if config.algorithm == "riemannian-adagrad":
            # accumulator lags one step: a fresh run's first update is the
            # sgd update with learning rate lr / sqrt(epsilon)
            step = lr * g / np.sqrt(acc + config.adagrad_epsilon)
            acc += g * g
        else:
            step = lr * g
        W = retract(W, -tangent_project(W, step))

    W = _fix_column_signs(W)
    trace.final_loss = loss_and_grad(W)[0]
    return W, trace


def minimize_affine_target(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unconstrained least squares A w ~ b (normal equations, ridge fallback)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("inputs must be finite")
    gram = A.T @ A
    rhs = A.T @ b
    try:
        if 1.0 / np.linalg.cond(gram) < 1e-12:
            raise np.linalg.LinAlgError("ill conditioned")
        return np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        # minimum-norm solution for rank-deficient systems
        return np.linalg.lstsq(A, b, rcond=None)[0]
