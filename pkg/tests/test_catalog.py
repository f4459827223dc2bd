import numpy as np
import pytest
import sympy as sp
from numpy.testing import assert_allclose

from electroheat.catalog import CATALOG, X, Y, build_conductivity
from electroheat.errors import ParameterError


def _points(n=200, radius=1.0, seed=0):
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    t = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.column_stack((r * np.cos(t), r * np.sin(t)))


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_symbolic_potential_matches_numeric(name):
    conductivity = build_conductivity(name)
    points = _points()
    fn = sp.lambdify((X, Y), conductivity.potential_expr, "numpy")
    expected = np.broadcast_to(fn(points[:, 0], points[:, 1]), (points.shape[0],))
    assert_allclose(conductivity.potential(points), expected, rtol=1e-10, atol=1e-12)


def test_exponential_potential_is_constant():
    conductivity = build_conductivity("exponential", alpha=0.8)
    assert_allclose(conductivity.potential(_points()), 0.8**2 / 4, rtol=1e-12)


def test_constant_potential_vanishes():
    assert build_conductivity("constant").potential_sup() == 0.0


@pytest.mark.parametrize("name", ["quadratic", "gaussian", "exponential"])
def test_blending_matches_inside_and_is_one_outside(name):
    conductivity = build_conductivity(name)
    inside = _points(radius=1.0)
    assert_allclose(conductivity.blended_sqrt_gamma(inside), conductivity.sqrt_gamma(inside), rtol=1e-14)
    assert_allclose(conductivity.blended_potential(inside), conductivity.potential(inside), rtol=1e-10, atol=1e-12)
    outside = 1.35 * np.column_stack((np.cos(np.arange(8.0)), np.sin(np.arange(8.0))))
    assert_allclose(conductivity.blended_sqrt_gamma(outside), 1.0)
    assert_allclose(conductivity.blended_potential(outside), 0.0)


def test_blended_potential_matches_finite_difference_laplacian():
    conductivity = build_conductivity("gaussian", amplitude=0.3, width=0.6)
    points = np.array([[1.1, 0.05], [0.0, -1.2], [-0.8, 0.8]])
    eps = 1e-4
    sigma = conductivity.blended_sqrt_gamma
    lap = sum(
        sigma(points + step) + sigma(points - step) for step in (np.array([eps, 0.0]), np.array([0.0, eps]))
    ) - 4.0 * sigma(points)
    expected = lap / eps**2 / sigma(points)
    assert_allclose(conductivity.blended_potential(points), expected, atol=1e-4)


def test_catalog_field_carries_closed_form(mesh):
    conductivity = build_conductivity("quadratic", beta_x=0.2, beta_y=0.1)
    field = conductivity.scalar_field(mesh)
    assert field.closed_form is conductivity
    assert_allclose(field.values, (1 + 0.2 * mesh.nodes[:, 0] ** 2 + 0.1 * mesh.nodes[:, 1] ** 2) ** 2)


def test_unknown_family_and_bad_parameters():
    with pytest.raises(ParameterError):
        build_conductivity("lognormal")
    with pytest.raises(ParameterError):
        build_conductivity("exponential", beta=1.0)
    with pytest.raises(ParameterError):
        build_conductivity("quadratic", beta_x=-1.0)
