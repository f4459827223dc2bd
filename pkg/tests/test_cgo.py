import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import j1

from electroheat.catalog import build_conductivity
from electroheat.cgo import (
    DECAY_CSV_HEADER,
    CGOParameters,
    build_cgo,
    conductivity_cgo,
    conjugated_residual,
    expansion_terms,
    fourier_decay_probe,
    get_transform,
    modulation_identity_error,
    potential_from_conductivity,
    product_modulation,
    remainder_term,
    solve_conjugated,
    write_decay_csv,
    zero_potential,
)
from electroheat.errors import KTooSmallError, ParameterError


@pytest.fixture(scope="module")
def potential(grid):
    return potential_from_conductivity(grid, build_conductivity("gaussian", amplitude=0.01, width=0.5))


@pytest.fixture(scope="module")
def pair(potential):
    return tuple(build_cgo(potential, CGOParameters(k=30.0, sigma=sigma, order=3)) for sigma in (1, -1))


def test_potential_is_real_and_localized(potential, grid):
    assert potential.is_real
    assert potential.sup_norm() > 0.0
    assert potential.k_min() == pytest.approx(8.0 * (1.0 + potential.sup_norm()))
    assert np.all(potential.q[grid.radius > 1.5] == 0.0)


@pytest.mark.parametrize("kwargs", [{"k": 10, "sigma": 0}, {"k": 10, "order": 6}, {"k": 0}])
def test_parameter_validation(kwargs):
    with pytest.raises(ParameterError):
        CGOParameters(**kwargs)


def test_exponent_is_isotropic():
    eta = CGOParameters(k=3.0 - 4.0j, sigma=-1).eta
    assert abs(eta @ eta) < 1e-12


def test_zero_potential_gives_the_plain_exponential(grid):
    solution = build_cgo(zero_potential(grid), CGOParameters(k=10.0))
    assert grid.sup_disk(solution.r) == 0.0
    assert_allclose(solution.u(), solution.exponential())


def test_small_k_is_rejected(grid, potential):
    with pytest.raises(KTooSmallError):
        build_cgo(zero_potential(grid), CGOParameters(k=5.0))
    with pytest.raises(KTooSmallError):
        build_cgo(potential, CGOParameters(k=0.5 * potential.k_min()))


@pytest.mark.parametrize("sigma", [1, -1])
def test_conjugated_solve_residual(potential, grid, sigma):
    seed = expansion_terms(potential, 2, sigma=sigma)[0]
    assert conjugated_residual(seed, 20.0, grid=grid, sigma=sigma) < 1e-5
    r = solve_conjugated(seed, 20.0, grid=grid, sigma=sigma)
    assert r.shape == grid.shape


def test_second_term_matches_its_recursion(potential, grid):
    a1, a2 = expansion_terms(potential, 3)
    transform = get_transform(grid)
    expected = -2.0 * grid.derivative(a1, "d") + potential.chi * transform.P(potential.q * a1)
    assert np.abs(a2 - expected).max() < 1e-10
    assert_allclose(a1, potential.chi * transform.P(potential.q), atol=1e-14)


def test_expansion_order_cap(potential):
    with pytest.raises(ParameterError):
        expansion_terms(potential, 6)


def test_remainder_closes_the_expansion(pair):
    plus, _ = pair
    s = plus.params.symbol
    rebuilt = sum(term / s**j for j, term in enumerate(plus.coefficients, start=1))
    rebuilt = rebuilt + plus.remainder / s**3
    assert_allclose(rebuilt, plus.r, atol=1e-14)
    assert_allclose(remainder_term(plus.r, (), plus.params), s * plus.r)


def test_branches_are_conjugate_for_real_potential(potential, pair, grid):
    _, minus = pair
    mirrored = build_cgo(potential, CGOParameters(k=-30.0, sigma=1, order=3))
    gap = grid.sup_disk(minus.r - np.conj(mirrored.r))
    assert gap < 1e-10 * grid.sup_disk(minus.r)


def test_schrodinger_residual_is_small(pair):
    plus, minus = pair
    assert plus.relative_residual() < 1e-4
    assert minus.relative_residual() < 1e-4
    assert plus.iterations >= 1
    assert np.all(np.diff(plus.increments) < 0.0)


def test_product_modulation_identity(pair):
    plus, minus = pair
    assert modulation_identity_error(plus, minus) < 1e-10
    with pytest.raises(ParameterError):
        product_modulation(plus, plus)
    with pytest.raises(ParameterError):
        product_modulation(minus, plus)


def test_first_order_term_dominates(potential, grid):
    gaps = []
    for k in (20.0, 40.0):
        plus = build_cgo(potential, CGOParameters(k=k, order=2))
        gaps.append(grid.l2_disk(plus.r - plus.coefficients[0] / plus.params.symbol))
    # r - a_1/s decays like |k|^-2
    assert gaps[1] < 0.4 * gaps[0]


def test_disk_transform_matches_bessel(grid, tmp_path):
    def indicator(points):
        return (np.hypot(points[:, 0], points[:, 1]) <= 1.0).astype(float)

    report = fourier_decay_probe(zero_potential(grid), indicator, [10.0, 20.0, 40.0], label="disk")
    for row in report.rows:
        assert abs(abs(row.direct) - 2.0 * np.pi * abs(j1(abs(row.k))) / abs(row.k)) < 1e-4
    assert report.slope is not None
    path = write_decay_csv(tmp_path / "decay.csv", report)
    lines = path.read_text().splitlines()
    assert lines[0] == DECAY_CSV_HEADER
    assert len(lines) == 4


def test_decay_probe_reuses_prebuilt_pairs(potential, pair):
    g = np.exp(-potential.grid.radius**2 / 0.1)
    report = fourier_decay_probe(potential, g, [30.0], pairs={30.0 + 0.0j: pair})
    row = report.rows[0]
    # grid sums on both sides agree to rounding
    assert row.residual < 1e-10 * max(abs(row.direct), 1.0)
    assert report.slope is None


def test_constant_conductivity_solution_is_the_exponential(grid):
    u, solution = conductivity_cgo(build_conductivity("constant"), CGOParameters(k=12.0), grid)
    assert_allclose(u, solution.exponential())
