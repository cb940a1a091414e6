import numpy as np
import pytest

from symfield.features import (
    FeatureAtom,
    FeatureBasis,
    design_matrix,
    evaluate,
    jacobian,
    jacobian_stack,
    monomial_basis,
    trig_extend,
)


def fd_jacobian(basis, point, step=1e-5):
    point = np.asarray(point, dtype=float)
    J = np.zeros((len(basis), point.size))
    for j in range(point.size):
        up, dn = point.copy(), point.copy()
        up[j] += step
        dn[j] -= step
        J[:, j] = (evaluate(basis, up) - evaluate(basis, dn)) / (2 * step)
    return J


def test_monomial_order_degree2():
    basis = monomial_basis(2, 2)
    assert [a.exponents for a in basis.atoms] == [
        (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2),
    ]


def test_monomial_order_is_stable():
    a = monomial_basis(3, 3)
    b = monomial_basis(3, 3)
    assert a.atoms == b.atoms


def test_monomial_values():
    basis = monomial_basis(2, 2)
    row = evaluate(basis, (2.0, 3.0))
    assert np.allclose(row, [1, 2, 3, 4, 6, 9])


def test_jacobian_quadratic_atoms():
    basis = FeatureBasis(2, (
        FeatureAtom("monomial", (2, 0)), FeatureAtom("monomial", (1, 1)),
    ))
    J = jacobian(basis, (2.0, 3.0))
    assert np.allclose(J, [[4, 0], [3, 2]])


def test_jacobian_sin_at_origin():
    basis = FeatureBasis(3, (FeatureAtom("sin", axis=0),))
    J = jacobian(basis, (0.0, 0.0, 0.0))
    assert np.allclose(J, [[1, 0, 0]])


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(0)
    basis = trig_extend(monomial_basis(3, 3))
    for _ in range(5):
        point = rng.uniform(-2, 2, 3)
        J = jacobian(basis, point)
        ref = fd_jacobian(basis, point)
        assert np.abs(J - ref).max() <= 1e-6 * max(1.0, np.abs(ref).max())


def test_trig_extend_order():
    basis = trig_extend(monomial_basis(2, 1))
    kinds = [(a.kind, a.axis) for a in basis.atoms[3:]]
    assert kinds == [("cos", 0), ("cos", 1), ("sin", 0), ("sin", 1)]


def test_duplicate_atoms_rejected():
    atom = FeatureAtom("monomial", (1, 0))
    with pytest.raises(ValueError):
        FeatureBasis(2, (atom, atom))


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        FeatureAtom("monomial", (-1, 0))


def test_trig_atom_needs_axis():
    with pytest.raises(ValueError):
        FeatureAtom("sin")


def test_product_atom_value_and_partials():
    # x * (z - 1) over R^3
    inner = (
        (FeatureAtom("monomial", (0, 0, 1)), 1.0),
        (FeatureAtom("monomial", (0, 0, 0)), -1.0),
    )
    atom = FeatureAtom("product", (1, 0, 0), factor=inner)
    assert atom.artificial
    assert atom.degree() == 2
    pts = np.array([[2.0, 5.0, 3.0]])
    assert np.allclose(atom.values(pts), [4.0])
    # d/dx = z - 1, d/dz = x
    assert np.allclose(atom.partials(pts), [[2.0, 0.0, 2.0]])


def test_product_atom_partials_match_fd():
    inner = (
        (FeatureAtom("monomial", (2, 0)), 0.5),
        (FeatureAtom("monomial", (0, 1)), -2.0),
    )
    basis = FeatureBasis(2, (FeatureAtom("product", (1, 1), factor=inner),))
    point = np.array([0.7, -1.3])
    assert np.allclose(jacobian(basis, point), fd_jacobian(basis, point),
                       atol=1e-6)


def test_strip_artificial_and_drop_constant():
    basis = monomial_basis(2, 1)
    extended = basis.extend([
        FeatureAtom("product", (1, 0),
                    factor=((FeatureAtom("monomial", (0, 1)), 1.0),)),
    ])
    assert len(extended) == 4
    assert extended.strip_artificial().atoms == basis.atoms
    assert not basis.drop_constant().has_constant()
    assert basis.has_constant()


def test_design_and_jacobian_shapes():
    basis = trig_extend(monomial_basis(2, 2))
    pts = np.random.default_rng(1).uniform(-1, 1, (7, 2))
    assert design_matrix(basis, pts).shape == (7, len(basis))
    assert jacobian_stack(basis, pts).shape == (7, len(basis), 2)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        design_matrix(monomial_basis(2, 1), np.zeros((3, 3)))


def test_is_polynomial():
    assert monomial_basis(3, 2).is_polynomial()
    assert not trig_extend(monomial_basis(3, 2)).is_polynomial()


def test_atom_labels():
    assert FeatureAtom("monomial", (0, 0)).label() == "1"
    assert FeatureAtom("monomial", (2, 1)).label() == "x1^2*x2"
    assert FeatureAtom("sin", axis=1).label() == "sin(x2)"
    inner = ((FeatureAtom("monomial", (0, 1)), 2.0),)
    assert FeatureAtom("product", (1, 0), factor=inner).label() == "x1*(2*x2)"
