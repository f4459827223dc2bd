"""Voltage-to-heat-flow map, static energy recovery and separable sources."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy.sparse.linalg import spsolve

from .elliptic import ConductivitySolver, energy_density
from .errors import ConvergenceError, ParameterError
from .fem import inverse_weight_mass, mass_matrix, stiffness_matrix
from .heat import (
    DEFAULT_MODES,
    assemble_weighted_eigen,
    boundary_heat_flux,
    solve_transient_eigen,
    solve_transient_timestep,
    write_flux_csv,
)
from .models import (
    BoundaryData,
    CoefficientTriple,
    EigenDecomposition,
    ExcitationSchedule,
    MeasurementRecord,
    Mesh,
    SourceHistory,
    VoltageField,
)
from .utils import fingerprint, get_logger, trapezoid_weights

logger = get_logger(__name__)

METHODS = ("eigen", "timestep")
CHECK_SPACING = 0.5
CAP_FACTOR = 50.0


@dataclass
class _MeshSlot:
    mesh: Mesh
    solvers: Dict[str, ConductivitySolver] = field(default_factory=dict)
    voltages: Dict[Tuple[str, str], VoltageField] = field(default_factory=dict)
    eigen: Dict[Tuple[str, int], EigenDecomposition] = field(default_factory=dict)


class ElectrostaticCache:
    """Elliptic solutions and eigen decompositions shared across schedules.

    Entries are grouped per mesh object; each slot holds its mesh so the
    identity key stays valid. Reads and writes go through one re-entrant lock.
    """

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._slots: Dict[int, _MeshSlot] = {}

    def _slot(self, mesh: Mesh) -> _MeshSlot:
        slot = self._slots.get(id(mesh))
        if slot is None or slot.mesh is not mesh:
            slot = self._slots[id(mesh)] = _MeshSlot(mesh)
        return slot

    def voltage(self, triple: CoefficientTriple, boundary: BoundaryData) -> VoltageField:
        gamma_key = fingerprint(triple.gamma.values)
        key = (gamma_key, fingerprint(boundary.values))
        with self._lock:
            slot = self._slot(triple.mesh)
            cached = slot.voltages.get(key)
            if cached is not None:
                return cached
            solver = slot.solvers.get(gamma_key)
            if solver is None:
                solver = slot.solvers[gamma_key] = ConductivitySolver(triple.gamma)
            voltage = slot.voltages[key] = solver.solve(boundary)
            return voltage

    def eigen(self, triple: CoefficientTriple, n_modes: int) -> EigenDecomposition:
        key = (fingerprint(triple.kappa.values, triple.thermal.values), n_modes)
        with self._lock:
            slot = self._slot(triple.mesh)
            cached = slot.eigen.get(key)
            if cached is None:
                cached = slot.eigen[key] = assemble_weighted_eigen(
                    triple.mesh, triple.kappa, triple.thermal, n_modes
                )
            return cached

    def __len__(self) -> int:
        with self._lock:
            return sum(len(s.voltages) + len(s.eigen) for s in self._slots.values())

    def clear(self) -> None:
        with self._lock:
            self._slots.clear()


_DEFAULT_CACHE: Optional[ElectrostaticCache] = None
_CACHE_LOCK = threading.Lock()


def get_cache() -> ElectrostaticCache:
    """Process-wide cache (convenience factory function)."""

    global _DEFAULT_CACHE
    with _CACHE_LOCK:
        if _DEFAULT_CACHE is None:
            _DEFAULT_CACHE = ElectrostaticCache()
        return _DEFAULT_CACHE


def triple_id(triple: CoefficientTriple) -> str:
    digest = fingerprint(triple.gamma.values, triple.kappa.values, triple.thermal.values)
    return f"{triple.label}#{digest[:12]}"


def schedule_id(schedule: ExcitationSchedule) -> str:
    parts = [schedule.profile.values]
    if not schedule.static and schedule.g is not None:
        parts.append(schedule.g)
    return f"{schedule.label or schedule.profile.label}#{fingerprint(*parts)[:12]}"


def time_grid(t_final: float, dt: float) -> np.ndarray:
    """Uniform grid ``0, dt, ..., t_final``; ``t_final`` must be a multiple of ``dt``."""

    if t_final <= 0.0 or dt <= 0.0:
        raise ParameterError("t_final and dt must be positive")
    steps = int(round(t_final / dt))
    if steps < 1 or abs(steps * dt - t_final) > 1e-9 * t_final:
        raise ParameterError(f"t_final={t_final} is not a multiple of dt={dt}")
    return np.linspace(0.0, t_final, steps + 1)


def separable_source(
    triple: CoefficientTriple,
    h: BoundaryData,
    g: Optional[np.ndarray] = None,
    times: Optional[np.ndarray] = None,
    *,
    cache: Optional[ElectrostaticCache] = None,
) -> SourceHistory:
    """``S(x, t) = (grad u0 . gamma grad u0)(x) g(t)`` with ``u0`` driven by ``h``.

    The profile is used verbatim; pass ``g**2`` for a boundary voltage ``h g``. Without
    ``g`` the source is static.
    """

    cache = cache or get_cache()
    density = energy_density(cache.voltage(triple, h))
    if g is None:
        return SourceHistory.static(density, label=f"S[{h.label}]")
    if times is None:
        raise ParameterError("a time profile needs its grid")
    return SourceHistory.separable(density, np.asarray(g, dtype=float), np.asarray(times, dtype=float), label=f"S[{h.label}]g")


def voltage_to_heat_flow(
    triple: CoefficientTriple,
    schedule: ExcitationSchedule,
    t_final: float,
    dt: float,
    *,
    method: str = "eigen",
    n_modes: int = DEFAULT_MODES,
    theta: float = 0.5,
    cache: Optional[ElectrostaticCache] = None,
) -> MeasurementRecord:
    """Boundary heat-flow history for the boundary voltage ``h(x) g(t)``.

    The voltage is ``u0 g`` so the Joule source carries ``g**2``.

    Args:
        triple: Coefficients (gamma, kappa, A).
        schedule: Spatial profile ``h`` and time profile ``g`` (or static).
        t_final: Final time.
        dt: Grid step.
        method: ``"eigen"`` for the modal solver, ``"timestep"`` for the theta-scheme.
        n_modes: Modes for the eigen route.
        theta: Scheme parameter for the timestep route.
        cache: Shared elliptic/eigen cache; the process-wide one by default.
    """

    if method not in METHODS:
        raise ParameterError(f"method must be one of {METHODS}, got '{method}'")
    cache = cache or get_cache()
    times = time_grid(t_final, dt)
    if schedule.static:
        source = separable_source(triple, schedule.profile, cache=cache)
    else:
        g = schedule.profile_on(times)
        source = separable_source(triple, schedule.profile, g * g, times, cache=cache)

    if method == "eigen":
        psi = solve_transient_eigen(cache.eigen(triple, n_modes), source, times)
    else:
        psi = solve_transient_timestep(triple.mesh, triple.kappa, triple.thermal, source, times, theta)
    fluxes = boundary_heat_flux(psi, triple.thermal, triple.kappa, source)

    metadata = {
        "method": method,
        "n_modes": n_modes if method == "eigen" else None,
        "theta": theta if method == "timestep" else None,
        "t_final": float(t_final),
        "dt": float(dt),
        "n_times": int(times.size),
        "h_target": triple.mesh.h_target,
        "n_nodes": triple.mesh.n_nodes,
        "n_boundary": int(triple.mesh.boundary_nodes.size),
        "truncation_estimate": psi.truncation_estimate,
        "notes": list(psi.notes),
    }
    logger.debug("Measured %s under %s: %d times", triple.label, schedule.label, times.size)
    return MeasurementRecord(
        times=times,
        fluxes=tuple(fluxes),
        triple_id=triple_id(triple),
        schedule_id=schedule_id(schedule),
        metadata=metadata,
    )


def flux_discrepancy(reference: MeasurementRecord, other: MeasurementRecord) -> float:
    """Relative L2 distance of two flux histories over the boundary and the time grid."""

    if reference.times.shape != other.times.shape or not np.allclose(reference.times, other.times):
        raise ParameterError("flux histories live on different time grids")
    first, second = reference.flux_matrix(), other.flux_matrix()
    if first.shape != second.shape:
        raise ParameterError("flux histories live on different boundaries")
    weights = np.outer(trapezoid_weights(reference.times), reference.fluxes[0].weights)
    scale = float(np.sqrt(np.sum(weights * first**2)))
    gap = float(np.sqrt(np.sum(weights * (first - second) ** 2)))
    return gap / scale if scale > 0.0 else gap


def export_record(record: MeasurementRecord, directory: Union[str, Path], stem: str) -> Tuple[Path, Path]:
    """Write ``<stem>.csv`` (flux series) and ``<stem>.json`` (identifiers and grid metadata)."""

    directory = Path(directory)
    csv_path = write_flux_csv(directory / f"{stem}.csv", record.fluxes)
    sidecar = {
        "triple_id": record.triple_id,
        "schedule_id": record.schedule_id,
        "times": {"start": float(record.times[0]), "stop": float(record.times[-1]), "count": int(record.times.size)},
        "metadata": record.metadata,
    }
    json_path = directory / f"{stem}.json"
    json_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return csv_path, json_path


@dataclass(frozen=True)
class EnergyRecovery:
    """Outcome of the static-input energy recovery."""

    energy: float
    limit_energy: float
    stop_time: float
    checks: int
    lambda_1: float
    history: Tuple[float, ...]


def energy_recovery_report(
    triple: CoefficientTriple,
    f: BoundaryData,
    tol: float = 1e-6,
    *,
    n_modes: int = DEFAULT_MODES,
    cap_factor: float = CAP_FACTOR,
    cache: Optional[ElectrostaticCache] = None,
) -> EnergyRecovery:
    """Recover ``Q_gamma(f)`` as ``-lim int flux`` for the static input ``f``.

    The integrated flux is checked at ``t_k = 0.5 k / lambda_1``; the first time two
    successive values differ by less than ``tol`` (relative) is the stopping time. The
    exact limit from ``psi0`` is reported alongside.

    Raises:
        ConvergenceError: If the stopping time passes ``cap_factor / lambda_1``.
    """

    cache = cache or get_cache()
    mesh = triple.mesh
    density = energy_density(cache.voltage(triple, f))
    eig = cache.eigen(triple, n_modes)
    lam = eig.eigenvalues
    lambda_1 = float(lam[0])

    stiffness = stiffness_matrix(mesh, triple.thermal.values)
    weighted = inverse_weight_mass(mesh, triple.kappa.values)
    load = mass_matrix(mesh) @ density.values
    static = eig.to_nodal(_interior_static(eig, load))
    beta = eig.vectors.T @ (eig.mass @ static[eig.interior])
    boundary = mesh.boundary_nodes

    def integrated_flux(time: float) -> float:
        decay = beta * np.exp(-lam * time)
        psi = static - eig.to_nodal(eig.vectors @ decay)
        rate = eig.to_nodal(eig.vectors @ (lam * decay))
        residual = stiffness @ psi + weighted @ rate - load
        return float(residual[boundary].sum())

    limit_energy = -float((stiffness @ static - load)[boundary].sum())
    cap = cap_factor / lambda_1
    history = []
    previous = None
    k = 0
    while True:
        k += 1
        time = CHECK_SPACING * k / lambda_1
        if time > cap:
            raise ConvergenceError(f"integrated flux did not settle to {tol:.1e} before t = {cap:.3f}")
        energy = -integrated_flux(time)
        history.append(energy)
        if previous is not None and abs(energy - previous) <= tol * max(abs(energy), np.finfo(float).tiny):
            break
        previous = energy

    logger.info("Recovered energy %.6f (limit %.6f) for %s at t=%.3f", energy, limit_energy, f.label, time)
    return EnergyRecovery(
        energy=energy,
        limit_energy=limit_energy,
        stop_time=time,
        checks=k,
        lambda_1=lambda_1,
        history=tuple(history),
    )


def _interior_static(eig: EigenDecomposition, load: np.ndarray) -> np.ndarray:
    return np.asarray(spsolve(eig.stiffness.tocsc(), load[eig.interior]))


def recover_energy_static(triple: CoefficientTriple, f: BoundaryData, tol: float = 1e-6, **kwargs) -> float:
    """``-lim_{t->inf} int flux`` for the static boundary voltage ``f``."""

    return energy_recovery_report(triple, f, tol, **kwargs).energy


def recover_dn_pairing(
    triple: CoefficientTriple, f: BoundaryData, g: BoundaryData, tol: float = 1e-6, **kwargs
) -> float:
    """``<Lambda f, g>`` from heat-flow measurements alone, by polarization."""

    plus = recover_energy_static(triple, f + g, tol, **kwargs)
    minus = recover_energy_static(triple, f - g, tol, **kwargs)
    return 0.25 * (plus - minus)


__all__ = [
    "ElectrostaticCache",
    "get_cache",
    "triple_id",
    "schedule_id",
    "time_grid",
    "separable_source",
    "voltage_to_heat_flow",
    "flux_discrepancy",
    "export_record",
    "EnergyRecovery",
    "energy_recovery_report",
    "recover_energy_static",
    "recover_dn_pairing",
]
