import numpy as np
import pytest
from numpy.testing import assert_allclose

from electroheat.errors import ParameterError
from electroheat.spectral import (
    CauchyTransform,
    SpectralGrid,
    cauchy_P,
    cauchy_Pbar,
    disk_indicator,
    disk_indicator_transform,
    inverse_property_error,
)

WIDTH2 = 0.05


def _gaussian(grid):
    return np.exp(-grid.radius**2 / WIDTH2)


def _gaussian_transform(grid):
    # P exp(-|z|^2/w) = w (1 - exp(-|z|^2/w)) / (2z)
    z = grid.z
    safe = np.where(grid.radius > 0.0, z, 1.0)
    return np.where(grid.radius > 0.0, WIDTH2 * (1.0 - _gaussian(grid)) / (2.0 * safe), 0.0)


@pytest.mark.parametrize("half_width, n", [(1.5, 256), (2.0, 100), (2.0, 64)])
def test_grid_validation(half_width, n):
    with pytest.raises(ParameterError):
        SpectralGrid(half_width, n)


def test_disk_weights_integrate_to_pi(grid):
    assert_allclose(grid.disk_weights.sum(), np.pi, rtol=1e-4)
    assert_allclose(grid.integrate_disk(np.ones(grid.shape)).real, np.pi, rtol=1e-4)


def test_cutoff_radii_are_checked(grid):
    chi = grid.cutoff()
    assert chi[grid.disk_mask].min() == 1.0
    assert chi[grid.radius >= 1.45].max() == 0.0
    with pytest.raises(ParameterError):
        grid.cutoff(1.2, 1.8)


def test_spectral_laplacian_of_gaussian(grid):
    g = _gaussian(grid)
    r2 = grid.radius**2
    exact = (4.0 * r2 / WIDTH2**2 - 4.0 / WIDTH2) * g
    assert np.abs(grid.derivative(g, "lap") - exact).max() < 1e-8 * np.abs(exact).max()
    with pytest.raises(ParameterError):
        grid.derivative(g, "curl")


def test_gaussian_closed_form(grid):
    value = cauchy_P(grid, _gaussian(grid))
    assert grid.sup_disk(value - _gaussian_transform(grid)) < 1e-8


def test_conjugate_transform_is_conjugated_P(grid):
    g = _gaussian(grid) * (1.0 + 0.5j * grid.x)
    assert_allclose(cauchy_Pbar(grid, g), np.conj(cauchy_P(grid, np.conj(g))), atol=1e-12)


@pytest.mark.parametrize("conjugate", [False, True])
def test_transforms_invert_first_order_operators(grid, conjugate):
    g = _gaussian(grid) * np.exp(1j * grid.x) * (1.0 + grid.y)
    error = inverse_property_error(CauchyTransform(grid), g, conjugate=conjugate)
    assert error < 1e-8 * grid.sup_disk(g)


def test_rejects_input_outside_the_support_disk(grid):
    with pytest.raises(ParameterError):
        cauchy_P(grid, np.ones(grid.shape))
    with pytest.raises(ParameterError):
        cauchy_P(grid, np.ones((8, 8)))


def test_rejects_unknown_method(grid):
    with pytest.raises(ParameterError):
        CauchyTransform(grid, "quadrature")


def test_sampled_kernel_tracks_exact_symbol(grid):
    g = _gaussian(grid)
    exact = _gaussian_transform(grid)
    sampled = CauchyTransform(grid, "sampled").P(g)
    assert grid.sup_disk(sampled - exact) < 0.05 * grid.sup_disk(exact)


def _disk_error(grid):
    value = CauchyTransform(grid).P(disk_indicator(grid))
    closed = disk_indicator_transform(grid.z)
    away = (grid.radius <= 1.0) | ((grid.radius >= 1.2) & (grid.radius <= 1.9))
    return float(np.abs(value - closed)[away].max())


def test_disk_indicator_closed_form(grid):
    assert _disk_error(grid) < 1e-2


@pytest.mark.slow
def test_disk_indicator_closed_form_fine_grid():
    assert _disk_error(SpectralGrid(2.0, 512)) < 2e-3


def test_disk_indicator_transform_is_continuous_on_the_circle():
    angles = np.linspace(0.0, 2.0 * np.pi, 17)
    circle = np.exp(1j * angles)
    assert_allclose(disk_indicator_transform(circle * (1 - 1e-12)), disk_indicator_transform(circle * (1 + 1e-12)), atol=1e-10)
