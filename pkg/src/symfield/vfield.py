"""Vector-field symmetry machinery.

Builds the extended feature matrix whose nullspace columns are coefficient
vectors of annihilating vector fields, estimates those fields, estimates
additional functions the fields annihilate (invariant features), fits flow
parameters, integrates flows, and supports restricted searches over a
user-supplied basis of vector fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import manifold
from .features import FeatureBasis, design_matrix, jacobian_stack, monomial_basis
from .model_fit import KdeModel, LevelSetModel, ScalarFunctionModel, kde_gradient

__all__ = [
    "VectorFieldModel",
    "BasisVectorField",
    "GradientProvider",
    "FlowDivergedError",
    "FlowParameterResult",
    "as_provider",
    "extended_feature_matrix",
    "estimate_vector_fields",
    "escalate_vector_fields",
    "invariant_feature_matrix",
    "estimate_invariants",
    "estimate_flow_parameter",
    "flow_integrate",
    "basis_restricted_search",
]


class FlowDivergedError(FloatingPointError):
    def __init__(self, step: int):
        super().__init__(f"flow state became non-finite at step {step}")
        self.step = step


@dataclass
class VectorFieldModel:
    """c vector fields over a shared coefficient dictionary.

    Column j of ``columns`` stacks n blocks of m coefficients; block i holds
    the coefficients of component alpha^i of field j.
    """

    basis: FeatureBasis
    columns: np.ndarray  # (n * m, c)

    def __post_init__(self):
        self.columns = np.asarray(self.columns, dtype=float)
        if self.columns.ndim == 1:
            self.columns = self.columns[:, None]
        n, m = self.basis.dimension, len(self.basis)
        if self.columns.shape[0] != n * m:
            raise ValueError("coefficient column length must be n * m")

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def n_fields(self) -> int:
        return self.columns.shape[1]

    def blocks(self, j: int) -> np.ndarray:
        """(n, m) coefficient blocks of field j."""
        return self.columns[:, j].reshape(
            self.basis.dimension, len(self.basis)
        )

    def components(self, points: np.ndarray) -> np.ndarray:
        """(N, c, n) component values alpha^i_j at each point."""
        B = design_matrix(self.basis, points)
        out = np.empty((B.shape[0], self.n_fields, self.dimension))
        for j in range(self.n_fields):
            out[:, j, :] = B @ self.blocks(j).T
        return out

    def field(self, j: int = 0) -> "BasisVectorField":
        """Field j as a closed-form vector field."""
        return BasisVectorField(
            [
                ScalarFunctionModel(self.basis, row)
                for row in self.blocks(j)
            ]
        )

    def fields(self) -> list["BasisVectorField"]:
        return [self.field(j) for j in range(self.n_fields)]


@dataclass
class BasisVectorField:
    """A vector field with closed-form component functions."""

    components: list[ScalarFunctionModel]

    def __post_init__(self):
        dims = {c.basis.dimension for c in self.components}
        if len(dims) != 1 or len(self.components) != dims.pop():
            raise ValueError("need one component per coordinate")

    @property
    def dimension(self) -> int:
        return len(self.components)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """(N, n) component values at each point."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.column_stack([c(points) for c in self.components])

    def apply_to(self, f: ScalarFunctionModel, points: np.ndarray) -> np.ndarray:
        """X(f) at each point: alpha . grad f."""
        return np.einsum("ij,ij->i", self(points), f.gradient(points))

    def is_polynomial(self) -> bool:
        return all(c.basis.is_polynomial() for c in self.components)


class GradientProvider:
    """Per-point Jacobians J(F)(x_i) of shape (k, n) for a fitted F."""

    def __init__(self, source):
        if isinstance(source, LevelSetModel):
            self.dimension = source.basis.dimension
            self.n_components = source.n_components
            self._jac = source.jacobians
        elif isinstance(source, KdeModel):
            self.dimension = source.dimension
            self.n_components = 1
            self._jac = lambda X: kde_gradient(source, X)[:, None, :]
        else:
            models = (
                [source] if isinstance(source, ScalarFunctionModel) else list(source)
            )
            if not models:
                raise ValueError("need at least one scalar component")
            dims = {m.basis.dimension for m in models}
            if len(dims) != 1:
                raise ValueError("components disagree on dimension")
            self.dimension = dims.pop()
            self.n_components = len(models)
            self._jac = lambda X: np.stack(
                [m.gradient(X) for m in models], axis=1
            )

    def jacobians(self, points: np.ndarray) -> np.ndarray:
        J = self._jac(np.atleast_2d(np.asarray(points, dtype=float)))
        if not np.all(np.isfinite(J)):
            raise ValueError("provider produced non-finite Jacobians")
        return J


def as_provider(source) -> GradientProvider:
    return source if isinstance(source, GradientProvider) else GradientProvider(source)


def extended_feature_matrix(
    provider, data: np.ndarray, vf_basis: FeatureBasis
) -> np.ndarray:
    """(k N, n m) matrix M with (M W)[(i, l), j] = X_j(f_l)(x_i)."""
    provider = as_provider(provider)
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[1] != provider.dimension:
        raise ValueError("data dimension does not match provider")
    if vf_basis.dimension != provider.dimension:
        raise ValueError("vf_basis dimension does not match provider")
    J = provider.jacobians(data)  # (N, k, n)
    B = design_matrix(vf_basis, data)  # (N, m)
    N, k, n = J.shape
    m = B.shape[1]
    return np.einsum("ikr,im->ikrm", J, B).reshape(N * k, n * m)


def estimate_vector_fields(
    provider,
    data: np.ndarray,
    vf_basis: FeatureBasis,
    c: int,
    config: manifold.OptimizerConfig,
) -> tuple[VectorFieldModel, manifold.OptimizationTrace]:
    """Estimate c annihilating fields over the given coefficient dictionary."""
    M = extended_feature_matrix(provider, data, vf_basis)
    W, trace = manifold.minimize(M, c, config)
    return VectorFieldModel(vf_basis, W), trace


def degree_escalation_bases(n: int) -> list[FeatureBasis]:
    """Constant, linear (no constant), affine, quadratic dictionaries."""
    return [
        monomial_basis(n, 0),
        monomial_basis(n, 1, include_constant=False),
        monomial_basis(n, 1),
        monomial_basis(n, 2),
    ]


def escalate_vector_fields(
    provider,
    data: np.ndarray,
    c: int,
    config: manifold.OptimizerConfig,
    loss_threshold: float = 1e-4,
    bases: list[FeatureBasis] | None = None,
):
    """Search low-complexity coefficient families first.

    Returns (model, trace) of the first family whose final loss drops below
    the threshold, or the best family when none does.  Searching small
    dictionaries first sidesteps the X-versus-hX ambiguity.
    """
    provider = as_provider(provider)
    if bases is None:
        bases = degree_escalation_bases(provider.dimension)
    best = None
    for basis in bases:
        model, trace = estimate_vector_fields(provider, data, basis, c, config)
        if trace.final_loss < loss_threshold:
            return model, trace
        if best is None or trace.final_loss < best[1].final_loss:
            best = (model, trace)
    return best


def invariant_feature_matrix(
    fields: VectorFieldModel, data: np.ndarray, candidate_basis: FeatureBasis
) -> np.ndarray:
    """(c N, m2) matrix with entry [(i, j), k] = X_j(b^k)(x_i)."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if candidate_basis.dimension != fields.dimension:
        raise ValueError("candidate basis dimension does not match fields")
    Jc = jacobian_stack(candidate_basis, data)  # (N, m2, n)
    alphas = fields.components(data)  # (N, c, n)
    N, c, _ = alphas.shape
    return np.einsum("imn,icn->icm", Jc, alphas).reshape(
        N * c, len(candidate_basis)
    )


def estimate_invariants(
    fields: VectorFieldModel,
    data: np.ndarray,
    candidate_basis: FeatureBasis,
    q: int,
    config: manifold.OptimizerConfig,
) -> tuple[list[ScalarFunctionModel], manifold.OptimizationTrace]:
    """Estimate q orthonormal feature combinations annihilated by all fields."""
    if candidate_basis.has_constant():
        raise ValueError(
            "candidate basis must exclude the constant atom "
            "(constants are trivially invariant)"
        )
    M2 = invariant_feature_matrix(fields, data, candidate_basis)
    V, trace = manifold.minimize(M2, q, config)
    models = [
        ScalarFunctionModel(candidate_basis, V[:, j]) for j in range(q)
    ]
    return models, trace


@dataclass
class FlowParameterResult:
    model: ScalarFunctionModel
    residual: float
    flagged: bool  # "no-polynomial-flow-parameter"


def estimate_flow_parameter(
    fields: VectorFieldModel,
    data: np.ndarray,
    candidate_basis: FeatureBasis,
    residual_threshold: float = 1e-3,
) -> FlowParameterResult:
    """Least squares for theta with X(theta) = 1 over the candidate features."""
    if fields.n_fields != 1:
        raise ValueError("flow parameter fitting needs a single field")
    M2 = invariant_feature_matrix(fields, data, candidate_basis)
    v = manifold.minimize_affine_target(M2, np.ones(M2.shape[0]))
    residual = float(
        np.sqrt(np.mean((M2 @ v - 1.0) ** 2))
    )
    return FlowParameterResult(
        ScalarFunctionModel(candidate_basis, v),
        residual,
        flagged=residual > residual_threshold,
    )


def flow_integrate(
    field, x0, t: float, steps: int
) -> np.ndarray:
    """Classical fixed-step RK4 trajectory of dx/dt = alpha(x).

    Returns the (steps + 1, n) array of states including the start point.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if isinstance(field, VectorFieldModel):
        field = field.field(0)
    x = np.asarray(x0, dtype=float).copy()

    def velocity(y):
        return field(y[None, :])[0]

    h = t / steps
    out = np.empty((steps + 1, x.size))
    out[0] = x
    # overflow here is the signal for divergence, not an anomaly
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            k1 = velocity(x)
            k2 = velocity(x + 0.5 * h * k1)
            k3 = velocity(x + 0.5 * h * k2)
            k4 = velocity(x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise FlowDivergedError(i)
            out[i + 1] = x
    return out


def basis_restricted_search(
    basis_fields: list[BasisVectorField],
    f: ScalarFunctionModel,
    data: np.ndarray,
    config: manifold.OptimizerConfig,
) -> tuple[np.ndarray, manifold.OptimizationTrace]:
    """Unit-norm combination of given fields minimizing || sum a_j X_j(f) ||."""
    if not basis_fields:
        raise ValueError("need at least one basis field")
    data = np.atleast_2d(np.asarray(data, dtype=float))
    A = np.column_stack([X.apply_to(f, data) for X in basis_fields])
    a, trace = manifold.minimize(A, 1, config)
    return a[:, 0], trace
