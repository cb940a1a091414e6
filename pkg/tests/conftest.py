"""Shared fixtures and factories for the test suite."""

import numpy as np
import pytest

import symfield as sf
from symfield.features import monomial_basis


def poly_model(basis, coeff_map):
    """Scalar model over ``basis`` from an exponents -> coefficient map."""
    c = np.zeros(len(basis))
    for i, atom in enumerate(basis.atoms):
        if atom.exponents in coeff_map:
            c[i] = coeff_map[atom.exponents]
    return sf.ScalarFunctionModel(basis, c)


def poly_field(n, degree, *component_maps):
    """Vector field with polynomial components given as exponent maps."""
    basis = monomial_basis(n, degree)
    return sf.BasisVectorField([poly_model(basis, m) for m in component_maps])


def rotation_field_2d():
    """-y d/dx + x d/dy."""
    return poly_field(2, 1, {(0, 1): -1.0}, {(1, 0): 1.0})


@pytest.fixture
def experiment_config():
    """Optimizer settings that reliably converge on the benchmark problems."""
    return sf.OptimizerConfig("riemannian-adagrad", "mean-squared", 0.1, 5000)
