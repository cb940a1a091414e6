import numpy as np
import pytest

import symfield as sf
from symfield.features import monomial_basis
from symfield.geometry import fit_map, pullback_metric


def killing_map():
    data, _ = sf.generate(sf.GeneratorSpec("killing4d", 2000, 0))
    from symfield.datasets import killing4d_embedding

    image = killing4d_embedding(data)
    return fit_map(data, image, monomial_basis(3, 2)), data


def test_fit_map_recovers_embedding():
    map_model, _ = killing_map()
    # x = u, y = v, z = u^2 + v^2 - w, t = 2u
    expect = [
        {(1, 0, 0): 1.0},
        {(0, 1, 0): 1.0},
        {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 1): -1.0},
        {(1, 0, 0): 2.0},
    ]
    for comp, emap in zip(map_model.components, expect):
        for atom, c in zip(comp.basis.atoms, comp.coefficients):
            assert c == pytest.approx(emap.get(atom.exponents, 0.0), abs=1e-6)


def test_pullback_matches_closed_form():
    map_model, _ = killing_map()
    g1 = pullback_metric(map_model, [1.0, 1.0, 1.0])
    assert np.allclose(g1, [[9, 4, -2], [4, 5, -2], [-2, -2, 1]], atol=1e-6)
    g0 = pullback_metric(map_model, [0.0, 0.0, 0.0])
    assert np.allclose(g0, np.diag([5.0, 1.0, 1.0]), atol=1e-6)


def test_metric_exactly_symmetric_and_psd():
    map_model, _ = killing_map()
    rng = np.random.default_rng(0)
    for _ in range(100):
        p = rng.uniform(-1, 1, 3)
        g = pullback_metric(map_model, p)
        assert np.array_equal(g, g.T)
        assert np.linalg.eigvalsh(g).min() >= -1e-10


def test_linear_map_constant_pullback():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((4, 3))
    src = rng.uniform(-1, 1, (200, 3))
    map_model = fit_map(src, src @ A.T, monomial_basis(3, 1))
    expect = A.T @ A
    for p in ([0.0, 0.0, 0.0], [1.0, -2.0, 0.5]):
        assert np.allclose(pullback_metric(map_model, p), expect, atol=1e-8)


def test_pullback_matches_fd_jacobian():
    map_model, _ = killing_map()
    rng = np.random.default_rng(2)
    step = 1e-6
    for _ in range(5):
        p = rng.uniform(-1, 1, 3)
        J = np.zeros((4, 3))
        for j in range(3):
            up, dn = p.copy(), p.copy()
            up[j] += step
            dn[j] -= step
            J[:, j] = (map_model(up[None])[0] - map_model(dn[None])[0]) / (2 * step)
        assert np.allclose(pullback_metric(map_model, p), J.T @ J, atol=1e-6)


def test_map_shape_validation():
    with pytest.raises(ValueError):
        fit_map(np.zeros((5, 2)), np.zeros((4, 2)), monomial_basis(2, 1))
    map_model, _ = killing_map()
    with pytest.raises(ValueError):
        pullback_metric(map_model, [np.nan, 0.0, 0.0])
