"""Bodies of the named experiments E1..E6."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List

import numpy as np
from scipy.special import j1, jn_zeros

from electroheat.catalog import ClosedFormConductivity, build_conductivity
from electroheat.cgo import (
    CGOParameters,
    build_cgo,
    conjugated_residual,
    expansion_terms,
    fourier_decay_probe,
    get_transform,
    potential_from_conductivity,
    product_modulation,
    write_decay_csv,
    zero_potential,
)
from electroheat.density import (
    build_family,
    orthogonalized_decay,
    projection_residual,
    pushforward_weight,
    residual_table,
    write_residual_csv,
)
from electroheat.elliptic import dn_pairing, energy_density, energy_form, solve_conductivity
from electroheat.errors import ParameterError
from electroheat.fem import mass_matrix
from electroheat.geometry import identity_diffeo, pushforward_source, pushforward_tensor, pushforward_triple, random_bump_diffeo
from electroheat.heat import (
    assemble_weighted_eigen,
    solve_static_heat,
    solve_transient_eigen,
    solve_transient_timestep,
    static_heat_flux,
)
from electroheat.measurement import (
    CHECK_SPACING,
    ElectrostaticCache,
    energy_recovery_report,
    export_record,
    flux_discrepancy,
    recover_dn_pairing,
    time_grid,
    voltage_to_heat_flow,
)
from electroheat.mesh import build_disk_mesh
from electroheat.models import (
    BoundaryData,
    CoefficientTriple,
    ExcitationSchedule,
    FieldRole,
    Mesh,
    ScalarField,
    SourceHistory,
    TensorField,
)
from electroheat.spectral import CauchyTransform, SpectralGrid, disk_indicator, disk_indicator_transform, inverse_property_error
from electroheat.utils import bump_profile, loglog_slope
from models.experiment_config import CheckResult, ExperimentConfig
from services.reports import ReportWriter

logger = logging.getLogger(__name__)

FIRST_DIRICHLET_EIGENVALUE = float(jn_zeros(0, 1)[0] ** 2)
STATIC_FLUX_TOL = 0.01
DOUBLING_TOL = 1e-8
LIMIT_TOL = 1e-8
POLARIZATION_TOL = 1e-4
RESIDUAL_K = 30.0
CONJUGATED_K = 20.0
CONJUGATED_TOL = 1e-5
UNIFORM_K = (10.0, 20.0, 40.0, 80.0)
UNIFORM_RATIO = 3.0
REMAINDER_RATIO = 5.0
SECOND_ORDER_SLOPE = (-2.4, -1.6)
MODULATION_SLOPE = (-1.3, -0.7)
BRANCH_TOL = 1e-10
CONSISTENCY_TOL = 1e-8
BESSEL_TOL = 1e-4
CONJUGATION_TOL = 1e-12
GAUSSIAN_WIDTH2 = 0.05
NESTED_TOL = 1e-8
MEMBER_TOL = 1e-6
GRAM_TOL = 1e-10
ORTHOGONALITY_TOL = 1e-8
DENSITY_TARGET_TOL = 0.05


@dataclass
class ExperimentOutcome:
    """Checks, frozen-candidate values and free-form metadata of one experiment body."""

    checks: List[CheckResult] = field(default_factory=list)
    regression: Dict[str, float] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)


ExperimentBody = Callable[[ExperimentConfig, ReportWriter], ExperimentOutcome]


@dataclass(frozen=True)
class Experiment:
    id: str
    title: str
    body: ExperimentBody


EXPERIMENTS: Dict[str, Experiment] = {}


def register(experiment_id: str, title: str) -> Callable[[ExperimentBody], ExperimentBody]:
    def decorator(body: ExperimentBody) -> ExperimentBody:
        EXPERIMENTS[experiment_id] = Experiment(experiment_id, title, body)
        return body

    return decorator


def _conductivity(config: ExperimentConfig) -> ClosedFormConductivity:
    return build_conductivity(config.catalog, **config.catalog_params)


def _triple(mesh: Mesh, config: ExperimentConfig) -> CoefficientTriple:
    conductivity = _conductivity(config)
    return CoefficientTriple(
        gamma=conductivity.tensor_field(mesh),
        kappa=ScalarField.constant(mesh, config.kappa_scale, role=FieldRole.KAPPA, label=f"kappa={config.kappa_scale:g}"),
        thermal=TensorField.identity(mesh, role=FieldRole.THERMAL),
        label=conductivity.label,
    )


def excitation_schedules(mesh: Mesh, times: np.ndarray, count: int) -> List[ExcitationSchedule]:
    """Trigonometric profiles paired in turn with static, ramp and pulse time profiles."""

    span = float(times[-1])
    profiles = {
        "static": None,
        "ramp": times / span,
        "pulse": np.sin(np.pi * times / span),
    }
    kinds = list(profiles)
    schedules = []
    for index in range(count):
        mode = index // 2 + 1
        trig = np.cos if index % 2 == 0 else np.sin
        label = f"{trig.__name__}{mode}"
        kind = kinds[index % len(kinds)]
        boundary = BoundaryData.from_function(mesh, lambda x, y, m=mode, f=trig: f(m * np.arctan2(y, x)), label=label)
        g = profiles[kind]
        if g is None:
            schedules.append(ExcitationSchedule(profile=boundary, label=f"{label}/{kind}"))
        else:
            schedules.append(ExcitationSchedule(profile=boundary, g=g, times=times, static=False, label=f"{label}/{kind}"))
    return schedules


@register("E1", "Gauge invariance of the voltage-to-heat-flow map under boundary-fixing diffeomorphisms")
def run_gauge_invariance(config: ExperimentConfig, writer: ReportWriter) -> ExperimentOutcome:
    outcome = ExperimentOutcome()
    rng = np.random.default_rng(config.seed)
    if config.identity_diffeo:
        diffeos = [identity_diffeo()]
    else:
        diffeos = [random_bump_diffeo(rng, amplitude_ratio=config.diffeo_amplitude) for _ in range(config.diffeo_count)]

    levels = [config.mesh_h] + ([config.refined_h] if config.refined_h else [])
    rows = []
    for h in levels:
        mesh = build_disk_mesh(h)
        triple = _triple(mesh, config)
        cache = ElectrostaticCache()
        times = time_grid(config.t_final, config.dt)
        schedules = excitation_schedules(mesh, times, config.excitations)
        reference = [
            voltage_to_heat_flow(triple, schedule, config.t_final, config.dt, n_modes=config.n_modes, cache=cache)
            for schedule in schedules
        ]
        if h == levels[0]:
            for path in export_record(reference[0], writer.directory, "e1_flux_reference"):
                writer.record(path)
        worst = 0.0
        for d_index, diffeo in enumerate(diffeos):
            pushed = pushforward_triple(triple, diffeo)
            for s_index, schedule in enumerate(schedules):
                record = voltage_to_heat_flow(pushed, schedule, config.t_final, config.dt, n_modes=config.n_modes, cache=cache)
                gap = flux_discrepancy(reference[s_index], record)
                worst = max(worst, gap)
                rows.append((h, d_index, schedule.label, gap))
        threshold = config.gauge_tol * h / config.mesh_h
        outcome.checks.append(
            CheckResult.at_most(f"gauge_discrepancy_h={h:g}", worst, threshold, invariant="gauge invariance of the measurement map")
        )
        outcome.regression[f"gauge_discrepancy_h={h:g}"] = worst
        logger.info("E1 h=%g: worst discrepancy %.3e over %d diffeos", h, worst, len(diffeos))

    writer.write_csv("e1_gauge.csv", ("h", "diffeo", "excitation", "discrepancy"), rows)
    outcome.metadata["diffeos"] = [diffeo.label for diffeo in diffeos]
    return outcome


@register("E2", "Static-input energy recovery from boundary heat flow")
def run_energy_recovery(config: ExperimentConfig, writer: ReportWriter) -> ExperimentOutcome:
    outcome = ExperimentOutcome()
    mesh = build_disk_mesh(config.mesh_h)
    triple = CoefficientTriple.unit(mesh)
    cache = ElectrostaticCache()
    inputs = [
        ("f=x", BoundaryData.from_function(mesh, lambda x, y: x, label="x"), np.pi),
        ("f=Re z^2", BoundaryData.from_function(mesh, lambda x, y: x * x - y * y, label="Re z^2"), 2.0 * np.pi),
    ]
    history_rows = []
    for name, boundary, exact in inputs:
        report = energy_recovery_report(triple, boundary, config.recovery_tol, n_modes=config.n_modes, cache=cache)
        direct = energy_form(solve_conductivity(mesh, triple.gamma, boundary))
        outcome.checks.append(
            CheckResult.within(f"energy_identity_{name}", report.energy, exact, config.energy_tol, invariant="energy recovery identity")
        )
        outcome.checks.append(
            CheckResult.at_most(
                f"limit_vs_energy_form_{name}",
                abs(report.limit_energy - direct) / direct,
                LIMIT_TOL,
                invariant="static limit equals the discrete energy form",
            )
        )
        outcome.regression[f"energy_{name}"] = report.energy
        outcome.metadata[f"stop_time_{name}"] = report.stop_time
        for index, value in enumerate(report.history, start=1):
            history_rows.append((name, index, CHECK_SPACING * index / report.lambda_1, value))

    f, g = inputs[0][1], inputs[1][1]
    recovered = recover_dn_pairing(triple, f, g, config.recovery_tol, n_modes=config.n_modes, cache=cache)
    direct = dn_pairing(mesh, triple.gamma, f, g)
    outcome.checks.append(
        CheckResult.at_most("polarized_dn_pairing", abs(recovered - direct), POLARIZATION_TOL, invariant="DN pairing by polarization")
    )
    writer.write_csv("e2_energy_history.csv", ("input", "check", "t", "energy"), history_rows)
    return outcome


def _relative_mass_gap(mesh: Mesh, reference: np.ndarray, other: np.ndarray) -> float:
    mass = mass_matrix(mesh)
    gap = reference - other
    scale = float(np.sqrt(reference @ (mass @ reference)))
    return float(np.sqrt(gap @ (mass @ gap))) / scale


@register("E3", "Weighted spectrum and heat-solver cross-validation")
def run_heat_crossval(config: ExperimentConfig, writer: ReportWriter) -> ExperimentOutcome:
    outcome = ExperimentOutcome()
    fine = build_disk_mesh(config.refined_h or config.mesh_h)
    unit = CoefficientTriple.unit(fine)
    lowest = assemble_weighted_eigen(fine, unit.kappa, unit.thermal, n_modes=4)
    lambda_1 = float(lowest.eigenvalues[0])
    outcome.checks.append(
        CheckResult.within("lambda_1", lambda_1, FIRST_DIRICHLET_EIGENVALUE, config.spectrum_tol, invariant="first Dirichlet eigenvalue of the disk")
    )
    outcome.regression["lambda_1"] = lambda_1

    mesh = build_disk_mesh(config.mesh_h)
    triple = _triple(mesh, config)
    eig = assemble_weighted_eigen(mesh, triple.kappa, triple.thermal, config.n_modes)
    doubled = assemble_weighted_eigen(mesh, triple.kappa.scaled(2.0, label="2kappa"), triple.thermal, config.n_modes)
    ratio_gap = float(np.max(np.abs(doubled.eigenvalues / eig.eigenvalues - 2.0)) / 2.0)
    outcome.checks.append(CheckResult.at_most("kappa_doubling", ratio_gap, DOUBLING_TOL, invariant="eigenvalues scale with kappa"))
    writer.write_csv(
        "e3_spectrum.csv",
        ("index", "lambda", "lambda_doubled_kappa"),
        [(i, float(a), float(b)) for i, (a, b) in enumerate(zip(eig.eigenvalues, doubled.eigenvalues))],
    )

    times = time_grid(config.t_final, config.dt)
    unit_source = ScalarField.constant(mesh, 1.0, role=FieldRole.SOURCE, label="S=1")
    boundary = BoundaryData.from_function(mesh, lambda x, y: x, label="x")
    joule = energy_density(solve_conductivity(mesh, triple.gamma, boundary))
    rows = []
    for name, source_field in (("unit", unit_source), ("joule", joule)):
        source = SourceHistory.static(source_field)
        modal = solve_transient_eigen(eig, source, times)
        stepped = solve_transient_timestep(mesh, triple.kappa, triple.thermal, source, times, config.theta)
        gap = _relative_mass_gap(mesh, modal.values[-1], stepped.values[-1])
        rows.append((name, float(times[-1]), gap))
        outcome.checks.append(
            CheckResult.at_most(f"eigen_vs_timestep_{name}", gap, config.crossval_tol, invariant="two heat solvers agree")
        )
        outcome.regression[f"crossval_{name}"] = gap
    writer.write_csv("e3_crossval.csv", ("source", "t_final", "relative_gap"), rows)

    unit_triple = CoefficientTriple.unit(mesh)
    psi0 = solve_static_heat(mesh, unit_triple.thermal, unit_source)
    flux = static_heat_flux(mesh, unit_triple.thermal, psi0, unit_source)
    mean_flux = flux.integral() / float(flux.weights.sum())
    outcome.checks.append(CheckResult.within("static_flux_unit_source", mean_flux, -0.5, STATIC_FLUX_TOL, invariant="flux of (1 - r^2)/4"))
    joule_flux = static_heat_flux(mesh, triple.thermal, solve_static_heat(mesh, triple.thermal, joule), joule)
    outcome.checks.append(
        CheckResult.within("static_sum_rule", joule_flux.integral(), -joule.integral(), STATIC_FLUX_TOL, invariant="boundary flux balances the source")
    )
    return outcome


@register("E4", "CGO solutions: residuals, expansion orders and remainder uniformity")
def run_cgo_certification(config: ExperimentConfig, writer: ReportWriter) -> ExperimentOutcome:
    outcome = ExperimentOutcome()
    grid = SpectralGrid(config.grid_l, config.grid_n)
    transform = get_transform(grid)
    conductivity = _conductivity(config)
    potential = potential_from_conductivity(grid, conductivity)
    if potential.sup_norm() == 0.0:
        raise ParameterError(f"catalog entry '{config.catalog}' has a vanishing potential; E4 needs a non-constant conductivity")
    order = max(config.order, 2)

    trivial = build_cgo(zero_potential(grid), CGOParameters(k=config.k_sweep[0]), transform=transform)
    outcome.checks.append(CheckResult.at_most("zero_potential_r", grid.sup_disk(trivial.r), 0.0, invariant="q = 0 gives exp(eta.x)"))

    seed = expansion_terms(potential, 2, transform=transform)[0]
    conj_gap = conjugated_residual(seed, complex(CONJUGATED_K), grid=grid, transform=transform)
    outcome.checks.append(CheckResult.at_most("conjugated_solve_residual", conj_gap, CONJUGATED_TOL, invariant="conjugated first-order solve"))

    rows = []
    solved = {}
    ks, second, modulation, remainders, scaled = [], [], [], [], {}
    for k in config.k_sweep:
        plus = build_cgo(potential, CGOParameters(k=k, sigma=1, order=order), transform=transform)
        minus = build_cgo(potential, CGOParameters(k=k, sigma=-1, order=order), transform=transform)
        solved[complex(k)] = (plus, minus)
        s = plus.params.symbol
        gap = grid.l2_disk(plus.r - plus.coefficients[0] / s)
        R = product_modulation(plus, minus) - 1.0
        ks.append(abs(k))
        second.append(gap)
        modulation.append(grid.l2_disk(R))
        remainders.append(grid.l2_disk(plus.remainder))
        if k in UNIFORM_K:
            scaled[k] = abs(k) * grid.l2_disk(plus.r)
        rows.append((float(k), plus.iterations, grid.l2_disk(plus.r), gap, modulation[-1], remainders[-1], plus.relative_residual()))
    writer.write_csv("e4_cgo_sweep.csv", ("k", "iterations", "r_l2", "first_order_gap", "R_l2", "remainder_l2", "relative_residual"), rows)

    second_slope = loglog_slope(ks, second)
    modulation_slope = loglog_slope(ks, modulation)
    outcome.checks.append(CheckResult.at_least("second_order_slope_min", second_slope, SECOND_ORDER_SLOPE[0], invariant="r - a_1/(i conj k) = O(|k|^-2)"))
    outcome.checks.append(CheckResult.at_most("second_order_slope_max", second_slope, SECOND_ORDER_SLOPE[1], invariant="r - a_1/(i conj k) = O(|k|^-2)"))
    outcome.checks.append(CheckResult.at_least("modulation_slope_min", modulation_slope, MODULATION_SLOPE[0], invariant="||R|| = O(1/|k|)"))
    outcome.checks.append(CheckResult.at_most("modulation_slope_max", modulation_slope, MODULATION_SLOPE[1], invariant="||R|| = O(1/|k|)"))
    outcome.checks.append(
        CheckResult.at_most(f"remainder_b{order}_ratio", max(remainders) / min(remainders), REMAINDER_RATIO, invariant="remainder uniform in k")
    )
    if len(scaled) >= 2:
        outcome.checks.append(
            CheckResult.at_most("scaled_r_ratio", max(scaled.values()) / min(scaled.values()), UNIFORM_RATIO, invariant="|k| ||r|| bounded in k")
        )
    outcome.regression.update({"second_order_slope": second_slope, "modulation_slope": modulation_slope})

    k0 = complex(RESIDUAL_K)
    if k0 not in solved:
        solved[k0] = tuple(
            build_cgo(potential, CGOParameters(k=k0, sigma=sigma, order=order), transform=transform) for sigma in (1, -1)
        )
    plus, minus = solved[k0]
    outcome.checks.append(
        CheckResult.at_most("schrodinger_residual_k=30", plus.relative_residual(), config.residual_tol, invariant="CGO residual")
    )
    outcome.regression["schrodinger_residual_k=30"] = plus.relative_residual()

    if potential.is_real:
        mirrored = build_cgo(potential, CGOParameters(k=-k0, sigma=1, order=order), transform=transform)
        scale = max(grid.sup_disk(minus.r), np.finfo(float).tiny)
        branch_gap = grid.sup_disk(minus.r - np.conj(mirrored.r)) / scale
        outcome.checks.append(CheckResult.at_most("branch_symmetry", branch_gap, BRANCH_TOL, invariant="r~(k) = conj(r(-k)) for real q"))

        s = minus.params.symbol
        terms = minus.coefficients
        consistency = 0.0
        previous = s * minus.r
        for n, term in enumerate(terms, start=1):
            following = s ** (n + 1) * (minus.r - sum(t / s**j for j, t in enumerate(terms[:n], start=1)))
            consistency = max(consistency, grid.sup_disk(previous - (term + following / s)) / (abs(s) ** n * scale))
            previous = following
        outcome.checks.append(CheckResult.at_most("expansion_consistency", consistency, CONSISTENCY_TOL, invariant="orders agree after remainders"))

    zero = zero_potential(grid)

    def indicator(points: np.ndarray) -> np.ndarray:
        return (np.hypot(points[:, 0], points[:, 1]) <= 1.0).astype(float)

    def smooth(points: np.ndarray) -> np.ndarray:
        return bump_profile(np.hypot(points[:, 0], points[:, 1]) / 0.9)

    disk_report = fourier_decay_probe(zero, indicator, config.k_sweep, transform=transform, label="disk")
    bessel = max(abs(abs(row.direct) - abs(2.0 * np.pi * j1(abs(row.k)) / abs(row.k))) for row in disk_report.rows)
    outcome.checks.append(CheckResult.at_most("disk_transform_bessel", bessel, BESSEL_TOL, invariant="disk Fourier transform"))
    smooth_report = fourier_decay_probe(potential, smooth, config.k_sweep, transform=transform, label="bump", pairs=solved)
    if disk_report.slope is not None and smooth_report.slope is not None:
        steeper = disk_report.slope - smooth_report.slope
        outcome.checks.append(CheckResult.at_least("smooth_decays_faster", steeper, 0.0, invariant="smooth data decay faster"))
        outcome.regression["decay_slope_bump"] = smooth_report.slope
    for report, name in ((disk_report, "e4_decay_disk.csv"), (smooth_report, "e4_decay_bump.csv")):
        writer.record(write_decay_csv(writer.directory / name, report))
    outcome.metadata.update({"k_min": potential.k_min(), "potential": potential.label})
    return outcome


@register("E5", "Density of products and orthogonalized decay")
def run_density_probe(config: ExperimentConfig, writer: ReportWriter) -> ExperimentOutcome:
    outcome = ExperimentOutcome()
    mesh = build_disk_mesh(config.mesh_h)
    gamma = _conductivity(config).tensor_field(mesh)

    def r2(points: np.ndarray) -> np.ndarray:
        return points[:, 0] ** 2 + points[:, 1] ** 2

    targets = {
        "r2": r2,
        "x": lambda points: points[:, 0],
        "bump": lambda points: bump_profile(np.hypot(points[:, 0], points[:, 1]) / 0.8),
    }
    orders = list(range(1, config.max_trace_order + 1))
    rows = residual_table(mesh, gamma, targets, orders)
    writer.record(write_residual_csv(writer.directory / "e5_residuals.csv", rows))
    by_target: Dict[str, List[float]] = {}
    for row in rows:
        by_target.setdefault(row.target_id, []).append(row.residual)
        outcome.regression[f"residual_M={row.order}_{row.target_id}"] = row.residual
    increase = max(max(np.diff(values), default=0.0) for values in by_target.values())
    outcome.checks.append(CheckResult.at_most("nested_monotonicity", increase, NESTED_TOL, invariant="residual nonincreasing in M"))
    if config.catalog == "constant" and config.max_trace_order >= 2:
        outcome.checks.append(
            CheckResult.at_most("r2_residual", by_target["r2"][-1], DENSITY_TARGET_TOL, invariant="|x|^2 is a product of harmonic gradients")
        )

    family = build_family(mesh, gamma, config.max_trace_order)
    eigenvalues = family.gram_eigenvalues()
    outcome.checks.append(
        CheckResult.at_least("gram_psd", float(eigenvalues.min()) / float(eigenvalues.max()), -GRAM_TOL, invariant="Gram matrix PSD")
    )
    member = family.pairs.index((1, 3)) if (1, 3) in family.pairs else family.size - 1
    outcome.checks.append(
        CheckResult.at_most("member_residual", projection_residual(family.cells[member], family), MEMBER_TOL, invariant="members lie in the span")
    )

    def half_disk(points: np.ndarray) -> np.ndarray:
        return ((points[:, 0] > 0.0) & (np.hypot(points[:, 0], points[:, 1]) <= 1.0)).astype(float)

    grid = SpectralGrid(config.grid_l, config.grid_n)
    decay = orthogonalized_decay(family, half_disk, config.k_sweep, grid=grid)
    outcome.checks.append(CheckResult.at_most("orthogonality", decay.orthogonality, ORTHOGONALITY_TOL, invariant="orthogonalized seed is orthogonal"))
    writer.record(write_decay_csv(writer.directory / "e5_decay_seed.csv", decay.seed))
    if decay.orthogonalized is not None:
        writer.record(write_decay_csv(writer.directory / "e5_decay_orthogonalized.csv", decay.orthogonalized))
    if decay.gap is not None:
        outcome.regression["decay_gap"] = decay.gap
    outcome.metadata["decay_notes"] = list(decay.notes)

    rng = np.random.default_rng(config.seed)
    diffeo = random_bump_diffeo(rng, amplitude_ratio=config.diffeo_amplitude)
    small = min(config.max_trace_order, 4)
    target = ScalarField.from_function(mesh, r2, role=FieldRole.DENSITY, label="r2")
    original = projection_residual(target, build_family(mesh, gamma, small))
    pushed_family = build_family(mesh, pushforward_tensor(gamma, diffeo), small)
    pushed = projection_residual(
        pushforward_source(target, diffeo), pushed_family, weight=pushforward_weight(mesh, diffeo)
    )
    outcome.checks.append(
        CheckResult.at_most("gauge_covariance", abs(original - pushed), config.gauge_tol, invariant="residual invariant under pushforward")
    )
    return outcome


@register("E6", "Cauchy transform closed forms and inverse properties")
def run_cauchy_checks(config: ExperimentConfig, writer: ReportWriter) -> ExperimentOutcome:
    outcome = ExperimentOutcome()
    grid = SpectralGrid(config.grid_l, config.grid_n)
    rows = []

    indicator = disk_indicator(grid)
    closed = disk_indicator_transform(grid.z)
    inner = grid.radius <= 1.0
    outer = (grid.radius >= 1.2) & (grid.radius <= 1.9)
    for method in ("fourier", "sampled"):
        transform = CauchyTransform(grid, method)
        value = transform.P(indicator)
        error = float(max(np.abs(value - closed)[inner].max(), np.abs(value - closed)[outer].max()))
        rows.append(("disk", method, error))
        outcome.metadata[f"disk_error_{method}"] = error
    outcome.checks.append(CheckResult.at_most("disk_closed_form", rows[0][2], config.cauchy_tol, invariant="P of the disk indicator"))
    outcome.regression["disk_error"] = rows[0][2]

    transform = get_transform(grid)
    width2 = GAUSSIAN_WIDTH2
    gaussian = np.exp(-grid.radius**2 / width2)
    safe = np.where(grid.radius > 0.0, grid.z, 1.0)
    exact = np.where(grid.radius > 0.0, width2 * (1.0 - gaussian) / (2.0 * safe), 0.0)
    gaussian_error = grid.sup_disk(transform.P(gaussian) - exact)
    rows.append(("gaussian", "fourier", gaussian_error))
    outcome.checks.append(CheckResult.at_most("gaussian_closed_form", gaussian_error, config.inverse_tol, invariant="P of a Gaussian"))
    outcome.regression["gaussian_error"] = gaussian_error

    mixed = gaussian * (1.0 + 0.5j * grid.x)
    conjugation = float(np.abs(transform.Pbar(mixed) - np.conj(transform.P(np.conj(mixed)))).max())
    outcome.checks.append(CheckResult.at_most("conjugation_identity", conjugation, CONJUGATION_TOL, invariant="Pbar g = conj P conj g"))

    potential = potential_from_conductivity(grid, _conductivity(config))
    fields = {"gaussian": mixed, "potential": potential.q}
    for name, values in fields.items():
        if not np.any(values):
            continue
        scale = grid.sup_disk(values)
        for conjugate, label in ((False, "dbar_P"), (True, "d_Pbar")):
            error = inverse_property_error(transform, values, conjugate=conjugate) / scale
            rows.append((f"{name}:{label}", "fourier", error))
            outcome.checks.append(CheckResult.at_most(f"inverse_{label}_{name}", error, config.inverse_tol, invariant="2 dbar P = id, 2 d Pbar = id"))
    writer.write_csv("e6_cauchy.csv", ("case", "method", "max_error"), rows)
    return outcome


__all__ = ["EXPERIMENTS", "Experiment", "ExperimentOutcome", "excitation_schedules", "register"]
