"""Heat equation with zero boundary temperature: eigen-expansion and theta-scheme solvers.

The weak form throughout is ``M_kinv dpsi/dt + K psi = M S`` on interior nodes, with
``K`` the thermal stiffness, ``M_kinv`` the kappa^-1 weighted mass and ``M`` the plain
consistent mass.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh, splu

from .errors import EigenSolverError, ParameterError
from .fem import DirichletSystem, boundary_residual_flux, inverse_weight_mass, mass_matrix, stiffness_matrix
from .models import (
    EigenDecomposition,
    FluxTrace,
    Mesh,
    ScalarField,
    SourceHistory,
    SourceKind,
    TemperatureField,
    TensorField,
)
from .utils import get_logger

logger = get_logger(__name__)

DEFAULT_MODES = 64
DENSE_LIMIT = 2000
EIGEN_RESIDUAL_TOL = 1e-8
TRUNCATION_TOL = 1e-6
FLUX_CSV_HEADER = "t, node_index, arc_s, flux"


def _interior_block(matrix, interior: np.ndarray):
    return matrix[interior][:, interior]


def assemble_weighted_eigen(
    mesh: Mesh,
    kappa: ScalarField,
    thermal: TensorField,
    n_modes: int = DEFAULT_MODES,
    *,
    dense_limit: int = DENSE_LIMIT,
) -> EigenDecomposition:
    """Lowest eigenpairs of ``K phi = lambda M_kinv phi``, kappa^-1 orthonormal.

    Args:
        mesh: Disk mesh.
        kappa: Positive scalar field.
        thermal: Thermal conductivity tensor.
        n_modes: Number of modes, at most the interior node count.
        dense_limit: Interior sizes up to this use a dense solve; above it shift-invert Lanczos.

    Raises:
        ParameterError: If ``n_modes`` is out of range.
        EigenSolverError: If the eigensolver fails or returns pairs that miss the residual contract.
    """

    interior = mesh.interior_nodes
    if not (1 <= n_modes <= interior.size):
        raise ParameterError(f"n_modes must lie in [1, {interior.size}], got {n_modes}")

    stiffness = _interior_block(stiffness_matrix(mesh, thermal.values), interior).tocsc()
    mass = _interior_block(inverse_weight_mass(mesh, kappa.values), interior).tocsc()

    if interior.size <= dense_limit:
        try:
            values, vectors = scipy.linalg.eigh(
                stiffness.toarray(), mass.toarray(), subset_by_index=[0, n_modes - 1]
            )
        except scipy.linalg.LinAlgError as exc:
            raise EigenSolverError(f"dense generalized eigensolve of size {interior.size} failed: {exc}") from exc
        method = "dense"
    else:
        try:
            values, vectors = eigsh(stiffness, k=n_modes, M=mass, sigma=0.0, which="LM")
        except ArpackNoConvergence as exc:
            raise EigenSolverError(
                f"shift-invert Lanczos converged {len(exc.eigenvalues)} of {n_modes} modes"
            ) from exc
        except ArpackError as exc:
            raise EigenSolverError(f"shift-invert Lanczos failed: {exc}") from exc
        method = "shift-invert"

    order = np.argsort(values)
    values = values[order]
    vectors = vectors[:, order]

    # Cholesky re-orthonormalization in the weighted product.
    gram = vectors.T @ (mass @ vectors)
    try:
        factor = scipy.linalg.cholesky(0.5 * (gram + gram.T), lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigenvector Gram matrix is not positive definite: {exc}") from exc
    vectors = scipy.linalg.solve_triangular(factor, vectors.T, lower=True).T

    if values[0] <= 0.0:
        raise EigenSolverError(f"non-positive eigenvalue {values[0]:.3e}")
    applied = stiffness @ vectors
    residual = np.linalg.norm(applied - (mass @ vectors) * values, axis=0)
    scale = np.linalg.norm(applied, axis=0)
    worst = float(np.max(residual / scale))
    if worst > EIGEN_RESIDUAL_TOL:
        raise EigenSolverError(f"{method} eigenpairs miss the residual contract: worst relative residual {worst:.2e}")

    logger.debug(
        "%s eigensolve: %d modes on %d unknowns, lambda_1=%.6f, worst residual %.1e",
        method,
        n_modes,
        interior.size,
        values[0],
        worst,
    )
    return EigenDecomposition(
        mesh=mesh,
        eigenvalues=values,
        vectors=vectors,
        interior=interior,
        stiffness=stiffness,
        mass=mass,
        label=f"eigen({kappa.label},{thermal.label})",
    )


def solve_static_heat(mesh: Mesh, thermal: TensorField, source: ScalarField) -> np.ndarray:
    """Nodal solution of ``div(A grad psi0) + S = 0`` with ``psi0 = 0`` on the boundary."""

    load = mass_matrix(mesh) @ source.values
    return DirichletSystem(mesh, stiffness_matrix(mesh, thermal.values)).solve(rhs=load)


def _static_interior(eig: EigenDecomposition, source: ScalarField) -> np.ndarray:
    load = (mass_matrix(eig.mesh) @ source.values)[eig.interior]
    return splu(eig.stiffness.tocsc()).solve(load)


def _require_zero_start(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or times[0] != 0.0:
        raise ParameterError("time grid must start at t = 0")
    if np.any(np.diff(times) <= 0.0):
        raise ParameterError("time grid must be strictly increasing")
    return times


def solve_transient_eigen(
    eig: EigenDecomposition,
    source: SourceHistory,
    times: Sequence[float],
    *,
    tolerance: float = TRUNCATION_TOL,
) -> TemperatureField:
    """Modal solution for a static or separable source ``w(x) g(t)``.

    ``psi = g(t) psi_w + psi_1`` where ``psi_w`` is the static response to ``w``. The
    transient part is expanded in the modes; with ``g`` piecewise linear on the grid
    the Duhamel integral of each mode is exact:
    ``c_i(t) = beta_i (-g(0) exp(-lambda_i t) - int_0^t exp(-lambda_i (t-s)) g'(s) ds)``,
    ``beta_i = <psi_w, phi_i>_kinv``. For a static source this reduces to
    ``psi0 + sum <-psi0, phi_i> exp(-lambda_i t) phi_i``.

    When the estimated contribution of the discarded modes exceeds ``tolerance``
    the result carries a note and a warning is logged.
    """

    times = _require_zero_start(times)
    if source.kind is SourceKind.GENERAL:
        raise ParameterError("the eigen solver accepts static or separable sources only")
    assert source.spatial is not None
    g = source.profile_values(times)

    static = _static_interior(eig, source.spatial)
    beta = eig.vectors.T @ (eig.mass @ static)
    lam = eig.eigenvalues

    slopes = np.diff(g) / np.diff(times)
    memory = np.zeros((times.size, lam.size))
    for m, step in enumerate(np.diff(times)):
        decay = np.exp(-lam * step)
        memory[m + 1] = decay * memory[m] + slopes[m] * (-np.expm1(-lam * step)) / lam
    coefficients = beta[None, :] * (-g[0] * np.exp(-np.outer(times, lam)) - memory)
    interior_values = g[:, None] * static[None, :] + coefficients @ eig.vectors.T
    if times[0] == 0.0:
        interior_values[0] = 0.0

    # Discarded modes: the weighted norm of what the kept modes miss in psi_w.
    tail = static - eig.vectors @ beta
    tail_norm = float(np.sqrt(max(tail @ (eig.mass @ tail), 0.0)))
    first = times[1] if times.size > 1 else 0.0
    max_slope = float(np.abs(slopes).max(initial=0.0))
    estimate = tail_norm * (abs(g[0]) * float(np.exp(-lam[-1] * first)) + max_slope / lam[-1])

    notes = []
    if estimate > tolerance:
        notes.append(
            f"mode truncation estimate {estimate:.2e} exceeds {tolerance:.1e} with {eig.n_modes} modes"
        )
        logger.warning("Eigen solution with %d modes: truncation estimate %.2e", eig.n_modes, estimate)

    return TemperatureField(
        mesh=eig.mesh,
        times=times,
        values=eig.to_nodal(interior_values),
        truncation_estimate=estimate,
        notes=tuple(notes),
    )


def solve_impulse_response(eig: EigenDecomposition, w: ScalarField, times: Sequence[float]) -> TemperatureField:
    """Response to ``w(x) delta(t)``: ``sum (phi_i . M w) exp(-lambda_i t) phi_i`` for ``t > 0``."""

    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[0] <= 0.0:
        raise ParameterError("impulse response is sampled at strictly positive times")
    load = (mass_matrix(eig.mesh) @ w.values)[eig.interior]
    coefficients = eig.vectors.T @ load
    decay = np.exp(-np.outer(times, eig.eigenvalues))
    return TemperatureField(
        mesh=eig.mesh,
        times=times,
        values=eig.to_nodal((decay * coefficients[None, :]) @ eig.vectors.T),
    )


def solve_transient_timestep(
    mesh: Mesh,
    kappa: ScalarField,
    thermal: TensorField,
    source: SourceHistory,
    times: Sequence[float],
    theta: float = 0.5,
) -> TemperatureField:
    """Theta-scheme on ``M_kinv dpsi/dt = -K psi + M S``; theta = 0.5 is Crank-Nicolson.

    Raises:
        ParameterError: If theta is outside ``[0.5, 1]`` or the grid is not uniform.
    """

    if not (0.5 <= theta <= 1.0):
        raise ParameterError(f"theta must lie in [0.5, 1], got {theta}")
    times = _require_zero_start(times)
    if times.size < 2:
        raise ParameterError("time stepping needs at least two grid times")
    steps = np.diff(times)
    dt = float(steps[0])
    if not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
        raise ParameterError("time stepping needs a uniform grid")
    source.require_grid(times)

    stiffness = stiffness_matrix(mesh, thermal.values)
    weighted = inverse_weight_mass(mesh, kappa.values)
    mass = mass_matrix(mesh)
    system = DirichletSystem(mesh, weighted / dt + theta * stiffness)
    explicit = (weighted / dt - (1.0 - theta) * stiffness).tocsr()
    interior = mesh.interior_nodes

    values = np.zeros((times.size, mesh.n_nodes))
    load_prev = mass @ source.nodal(0)
    for n in range(1, times.size):
        load_next = mass @ source.nodal(n)
        rhs = explicit @ values[n - 1] + theta * load_next + (1.0 - theta) * load_prev
        values[n, interior] = system.solve_interior(rhs[interior])
        load_prev = load_next
    logger.debug("theta=%.2f stepping: %d steps of dt=%.3e", theta, times.size - 1, dt)
    return TemperatureField(mesh=mesh, times=times, values=values)


def _flux_trace(mesh: Mesh, residual: np.ndarray, time: Optional[float]) -> FluxTrace:
    return FluxTrace(
        mesh=mesh,
        values=boundary_residual_flux(mesh, residual),
        weights=mesh.boundary_weights,
        time=time,
    )


def boundary_heat_flux(
    psi: TemperatureField,
    thermal: TensorField,
    kappa: ScalarField,
    source: SourceHistory,
) -> List[FluxTrace]:
    """Consistent ``nu . A grad psi`` at every grid time.

    The time derivative uses centred differences with one-sided ends.

    Raises:
        ParameterError: If the history has a single time sample.
    """

    if psi.times.size < 2:
        raise ParameterError("flux recovery needs at least two time samples; use static_heat_flux")
    mesh = psi.mesh
    if source.kind is not SourceKind.STATIC:
        source.require_grid(psi.times)
    stiffness = stiffness_matrix(mesh, thermal.values)
    weighted = inverse_weight_mass(mesh, kappa.values)
    mass = mass_matrix(mesh)
    rates = np.gradient(psi.values, psi.times, axis=0)
    traces = []
    for n, time in enumerate(psi.times):
        residual = stiffness @ psi.values[n] + weighted @ rates[n] - mass @ source.nodal(n)
        traces.append(_flux_trace(mesh, residual, float(time)))
    return traces


def static_heat_flux(mesh: Mesh, thermal: TensorField, psi0: np.ndarray, source: ScalarField) -> FluxTrace:
    """The steady variant of :func:`boundary_heat_flux`."""

    residual = stiffness_matrix(mesh, thermal.values) @ psi0 - mass_matrix(mesh) @ source.values
    return _flux_trace(mesh, residual, None)


def write_flux_csv(path: Union[str, Path], traces: Sequence[FluxTrace]) -> Path:
    """Write flux traces as rows ``t, node_index, arc_s, flux``; a missing time is written as ``inf``."""

    destination = Path(path)
    destination.parent.mkdir(parents=True, exist_ok=True)
    with destination.open("w", newline="", encoding="utf-8") as handle:
        handle.write(FLUX_CSV_HEADER + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        for trace in traces:
            mesh = trace.mesh
            stamp = "inf" if trace.time is None else f"{trace.time:.10e}"
            for node, arc, value in zip(mesh.boundary_nodes, mesh.arc_coordinates, trace.values):
                writer.writerow([stamp, int(node), f"{arc:.10e}", f"{value:.12e}"])
    return destination


__all__ = [
    "DEFAULT_MODES",
    "FLUX_CSV_HEADER",
    "assemble_weighted_eigen",
    "solve_static_heat",
    "solve_transient_eigen",
    "solve_impulse_response",
    "solve_transient_timestep",
    "boundary_heat_flux",
    "static_heat_flux",
    "write_flux_csv",
]
