"""Estimation of machine-learning functions from tabular data.

Covers polynomial/trig regression of targets, constrained level-set
estimation with elbow-based component selection, the two degeneracy
workarounds (projection onto discovered affine components, artificial
column extension), and weighted Gaussian kernel density estimation with
analytic gradients.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import manifold
from .features import (
    FeatureAtom,
    FeatureBasis,
    _graded_lex_exponents,
    design_matrix,
    jacobian_stack,
)

__all__ = [
    "ScalarFunctionModel",
    "LevelSetModel",
    "KdeModel",
    "ElbowTrace",
    "EmptyLevelSetError",
    "AffineFrame",
    "fit_regression",
    "fit_level_set",
    "select_components_elbow",
    "project_onto_affine",
    "extend_degenerate_columns",
    "kde_fit",
    "kde_eval",
    "kde_gradient",
]

ELBOW_LOSS_FLOOR = 1e-12


class EmptyLevelSetError(ValueError):
    """The affine level-set system has no solution point."""


@dataclass
class ScalarFunctionModel:
    """f(x) = coefficients . (atom values at x)."""

    basis: FeatureBasis
    coefficients: np.ndarray
    residual: float = 0.0
    ridge_fallback: bool = False

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape != (len(self.basis),):
            raise ValueError("coefficient length does not match basis")
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("coefficients must be finite")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return design_matrix(self.basis, points) @ self.coefficients

    def gradient(self, points: np.ndarray) -> np.ndarray:
        """(N, n) array of gradients."""
        J = jacobian_stack(self.basis, points)
        return np.einsum("m,imj->ij", self.coefficients, J)

    def degree(self) -> int:
        nz = np.nonzero(self.coefficients)[0]
        return max((self.basis.atoms[i].degree() for i in nz), default=0)


@dataclass
class LevelSetModel:
    """F(x) = W^T b(x) with orthonormal coefficient columns."""

    basis: FeatureBasis
    W: np.ndarray

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=float)
        if self.W.ndim != 2 or self.W.shape[0] != len(self.basis):
            raise ValueError("W must be (n_atoms, k)")
        if self.W.shape[1] > 0:
            err = np.abs(self.W.T @ self.W - np.eye(self.W.shape[1])).max()
            if err > manifold.ORTHONORMALITY_TOL:
                raise ValueError(
                    f"columns not orthonormal (deviation {err:.2e})"
                )

    @property
    def n_components(self) -> int:
        return self.W.shape[1]

    def components(self) -> list[ScalarFunctionModel]:
        return [
            ScalarFunctionModel(self.basis, self.W[:, j])
            for j in range(self.W.shape[1])
        ]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return design_matrix(self.basis, points) @ self.W

    def jacobians(self, points: np.ndarray) -> np.ndarray:
        """(N, k, n) array of Jacobians of F."""
        J = jacobian_stack(self.basis, points)
        return np.einsum("mk,imj->ikj", self.W, J)

    def strip_artificial(self) -> "LevelSetModel":
        """Drop artificially extended columns and renormalize each column."""
        keep = [i for i, a in enumerate(self.basis.atoms) if not a.artificial]
        W = self.W[keep]
        W = W / np.linalg.norm(W, axis=0, keepdims=True)
        # renormalized columns may no longer be mutually orthonormal; keep
        # them only when they are
        return LevelSetModel(self.basis.strip_artificial(), W)


@dataclass
class ElbowTrace:
    losses: list = field(default_factory=list)  # (component_count, loss)
    selected: int = 0
    no_elbow: bool = False

    def to_dict(self) -> dict:
        return {
            "losses": [[int(k), float(v)] for k, v in self.losses],
            "selected": int(self.selected),
            "no_elbow": self.no_elbow,
        }


def fit_regression(
    data: np.ndarray, targets: np.ndarray, basis: FeatureBasis
) -> ScalarFunctionModel:
    """Ordinary least squares of targets over the feature dictionary."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    targets = np.asarray(targets, dtype=float)
    B = design_matrix(basis, data)
    gram = B.T @ B
    rhs = B.T @ targets
    ridge = False
    try:
        with np.errstate(all="ignore"):
            cond = np.linalg.cond(gram)
        if not np.isfinite(cond) or cond > 1e14:
            raise np.linalg.LinAlgError("rank deficient")
        coeffs = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        lam = 1e-10 * (np.trace(gram) / len(basis) + 1.0)
        coeffs = np.linalg.solve(gram + lam * np.eye(len(basis)), rhs)
        ridge = True
    resid = float(np.sqrt(np.mean((B @ coeffs - targets) ** 2)))
    return ScalarFunctionModel(basis, coeffs, residual=resid, ridge_fallback=ridge)


def fit_level_set(
    data: np.ndarray,
    basis: FeatureBasis,
    k: int,
    config: manifold.OptimizerConfig,
    W0: np.ndarray | None = None,
) -> tuple[LevelSetModel, float]:
    """Estimate k orthonormal coefficient columns with B W ~ 0."""
    B = design_matrix(basis, np.atleast_2d(np.asarray(data, dtype=float)))
    W, trace = manifold.minimize(B, k, config, W0=W0)
    return LevelSetModel(basis, W), trace.final_loss


def select_components_elbow(
    data: np.ndarray,
    basis: FeatureBasis,
    k_max: int,
    config: manifold.OptimizerConfig,
    elbow_ratio: float = 10.0,
) -> ElbowTrace:
    """Pick the component count just before the first large loss jump."""
    if elbow_ratio <= 0:
        raise ValueError("elbow_ratio must be positive")
    trace = ElbowTrace()
    losses = []
    for k in range(1, k_max + 1):
        _, loss = fit_level_set(data, basis, k, config)
        losses.append(loss)
        trace.losses.append((k, loss))
    for k in range(1, k_max):
        if losses[k] / max(losses[k - 1], ELBOW_LOSS_FLOOR) > elbow_ratio:
            trace.selected = k
            return trace
    trace.selected = k_max
    trace.no_elbow = True
    return trace


@dataclass
class AffineFrame:
    """Orthonormal chart of the affine subspace {x : W^T phi(x) = 0}."""

    origin: np.ndarray
    axes: np.ndarray  # (n, n - k), orthonormal columns

    def restore(self, reduced: np.ndarray) -> np.ndarray:
        """Map reduced coordinates back to ambient coordinates."""
        reduced = np.atleast_2d(np.asarray(reduced, dtype=float))
        return self.origin[None, :] + reduced @ self.axes.T


def _affine_system(model: LevelSetModel) -> tuple[np.ndarray, np.ndarray]:
    """Rows C x + d = 0 from a constant+linear level-set model."""
    n = model.basis.dimension
    C = np.zeros((model.n_components, n))
    d = np.zeros(model.n_components)
    for j in range(model.n_components):
        for coeff, atom in zip(model.W[:, j], model.basis.atoms):
            if coeff == 0.0:
                continue
            if atom.kind != "monomial" or atom.degree() > 1:
                raise ValueError("model is not restricted to affine atoms")
            if atom.degree() == 0:
                d[j] += coeff
            else:
                C[j, list(atom.exponents).index(1)] += coeff
    return C, d


def project_onto_affine(
    data: np.ndarray, model: LevelSetModel
) -> tuple[np.ndarray, AffineFrame]:
    """Coordinates of data orthogonally projected onto the affine level set."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    n = model.basis.dimension
    C, d = _affine_system(model)
    if C.shape[0] == 0:
        return data.copy(), AffineFrame(np.zeros(n), np.eye(n))

    origin, residual, rank, _ = np.linalg.lstsq(C, -d, rcond=None)
    if np.linalg.norm(C @ origin + d) > 1e-8 * max(1.0, np.linalg.norm(d)):
        raise EmptyLevelSetError("affine components are inconsistent")

    # null-space basis oriented along the coordinate axes where possible:
    # Gram-Schmidt of the projected axes keeps e.g. the (x, y) plane as (x, y)
    _, s, Vt = np.linalg.svd(C)
    tol = max(C.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    null = Vt[np.sum(s > tol):].T
    proj = null @ null.T
    axes = []
    for j in range(n):
        v = proj @ np.eye(n)[:, j]
        for u in axes:
            v = v - u * (u @ v)
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            axes.append(v / norm)
    axes = np.column_stack(axes) if axes else np.zeros((n, 0))
    reduced = (data - origin[None, :]) @ axes
    return reduced, AffineFrame(origin, axes)


def extend_degenerate_columns(
    basis: FeatureBasis, known, degree: int
) -> FeatureBasis:
    """Append artificial atoms h * f for monomials h with deg(h f) <= degree."""
    n = basis.dimension
    extra = []
    for model in known:
        f_deg = model.degree()
        factor = tuple(
            (atom, float(c))
            for atom, c in zip(model.basis.atoms, model.coefficients)
            if c != 0.0
        )
        h_max = degree - f_deg
        for exps in _graded_lex_exponents(n, h_max):
            if sum(exps) == 0:
                continue  # constant * f duplicates f itself
            atom = FeatureAtom("product", exponents=exps, factor=factor)
            if atom not in extra:
                extra.append(atom)
    return basis.extend(extra)


@dataclass
class KdeModel:
    """Weighted Gaussian mixture density with a shared isotropic bandwidth."""

    centers: np.ndarray
    weights: np.ndarray
    bandwidth: float

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.centers.shape[0],):
            raise ValueError("one weight per center required")
        if np.any(self.weights < 0) or self.weights.sum() <= 0:
            raise ValueError("weights must be nonnegative with positive sum")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")

    @property
    def dimension(self) -> int:
        return self.centers.shape[1]


def scott_bandwidth(data: np.ndarray) -> float:
    """N^(-1/(n+4)) times the mean marginal standard deviation."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    N, n = data.shape
    return float(N ** (-1.0 / (n + 4)) * np.mean(data.std(axis=0)))


def kde_fit(
    data: np.ndarray,
    weights: np.ndarray | None = None,
    bandwidth="scott",
) -> KdeModel:
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[1] > 2:
        warnings.warn(
            "kernel density estimation degrades beyond two dimensions",
            stacklevel=2,
        )
    if weights is None:
        weights = np.ones(data.shape[0])
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    if weights.sum() <= 0:
        raise ValueError("total weight must be positive")
    h = scott_bandwidth(data) if bandwidth == "scott" else float(bandwidth)
    return KdeModel(data, weights, h)


def _kernel_sums(
    model: KdeModel, points: np.ndarray, want_gradient: bool
) -> tuple[np.ndarray, np.ndarray | None]:
    """Weighted kernel sums (and gradient sums) in memory-bounded chunks."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    C = model.centers
    w = model.weights
    inv2h2 = 1.0 / (2.0 * model.bandwidth**2)
    c_sq = np.einsum("ij,ij->i", C, C)
    vals = np.empty(points.shape[0])
    grads = np.empty(points.shape) if want_gradient else None
    chunk = max(1, int(1e7) // max(1, C.shape[0]))
    for lo in range(0, points.shape[0], chunk):
        P = points[lo : lo + chunk]
        p_sq = np.einsum("ij,ij->i", P, P)
        d2 = p_sq[:, None] + c_sq[None, :] - 2.0 * (P @ C.T)
        K = np.exp(-np.maximum(d2, 0.0) * inv2h2) * w[None, :]
        vals[lo : lo + chunk] = K.sum(axis=1)
        if want_gradient:
            grads[lo : lo + chunk] = (K @ C - K.sum(axis=1)[:, None] * P) * (
                2.0 * inv2h2
            )
    return vals, grads


def _kde_norm(model: KdeModel) -> float:
    n = model.dimension
    return float(
        model.weights.sum() * (2.0 * np.pi * model.bandwidth**2) ** (n / 2.0)
    )


def kde_eval(model: KdeModel, points: np.ndarray) -> np.ndarray:
    """Density values of the weighted Gaussian mixture."""
    vals, _ = _kernel_sums(model, points, want_gradient=False)
    return vals / _kde_norm(model)


def kde_gradient(model: KdeModel, points: np.ndarray) -> np.ndarray:
    """(N, n) array of analytic density gradients."""
    _, grads = _kernel_sums(model, points, want_gradient=True)
    return grads / _kde_norm(model)
