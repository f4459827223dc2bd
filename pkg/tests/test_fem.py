import numpy as np
import pytest
from numpy.testing import assert_allclose

from electroheat.fem import (
    DirichletSystem,
    boundary_residual_flux,
    cell_gradients,
    cell_quadratic,
    mass_matrix,
    stiffness_matrix,
)


def _identity(mesh):
    return np.broadcast_to(np.eye(2), (mesh.n_nodes, 2, 2))


def test_stiffness_annihilates_constants(mesh):
    stiffness = stiffness_matrix(mesh, _identity(mesh))
    assert_allclose(stiffness @ np.ones(mesh.n_nodes), 0.0, atol=1e-10)
    assert abs(stiffness - stiffness.T).max() < 1e-12


def test_mass_integrates_products_of_linears(mesh):
    mass = mass_matrix(mesh)
    x = mesh.nodes[:, 0]
    total = np.ones(mesh.n_nodes) @ (mass @ np.ones(mesh.n_nodes))
    assert_allclose(total, mesh.areas.sum(), rtol=1e-12)
    # x*x integrates exactly for linear interpolants
    exact = np.sum(mesh.areas / 12.0 * (np.sum(mesh.nodes[mesh.triangles, 0], axis=1) ** 2 + np.sum(mesh.nodes[mesh.triangles, 0] ** 2, axis=1)))
    assert_allclose(x @ (mass @ x), exact, rtol=1e-12)


def test_gradients_of_linear_field_are_exact(mesh):
    values = 2.0 * mesh.nodes[:, 0] - 3.0 * mesh.nodes[:, 1] + 1.0
    grads = cell_gradients(mesh, values)
    assert_allclose(grads, np.tile([2.0, -3.0], (mesh.n_triangles, 1)), atol=1e-10)
    products = cell_quadratic(mesh, _identity(mesh), values, values)
    assert_allclose(products, 13.0, rtol=1e-10)


def test_dirichlet_system_reproduces_harmonic_linear(mesh):
    system = DirichletSystem(mesh, stiffness_matrix(mesh, _identity(mesh)))
    exact = mesh.nodes[:, 0] + 0.5 * mesh.nodes[:, 1]
    solution = system.solve(boundary_values=exact[mesh.boundary_nodes])
    assert_allclose(solution, exact, atol=1e-10)
    assert np.array_equal(solution[mesh.boundary_nodes], exact[mesh.boundary_nodes])


@pytest.mark.parametrize("coefficients", [(1.0, 0.0), (0.0, 1.0), (0.6, -0.8)])
def test_consistent_flux_of_linear_field(mesh, coefficients):
    a, b = coefficients
    stiffness = stiffness_matrix(mesh, _identity(mesh))
    u = a * mesh.nodes[:, 0] + b * mesh.nodes[:, 1]
    flux = boundary_residual_flux(mesh, stiffness @ u)
    points = mesh.nodes[mesh.boundary_nodes]
    normal_derivative = a * points[:, 0] + b * points[:, 1]
    # consistent flux is exact in the weighted boundary pairing
    assert_allclose(flux @ mesh.boundary_weights, 0.0, atol=1e-10)
    assert np.max(np.abs(flux - normal_derivative)) < 0.05
