"""Product families ``grad u_i . gamma grad u_j`` and how well they span targets on the disk."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import LinearNDInterpolator

from .cgo import DecayReport, PotentialField, fourier_decay_probe, zero_potential
from .elliptic import ConductivitySolver
from .errors import ParameterError
from .fem import cell_quadratic
from .models import BoundaryData, Diffeomorphism, FieldRole, Mesh, ScalarField, TensorField
from .spectral import CauchyTransform, SpectralGrid
from .utils import get_logger

logger = get_logger(__name__)

MAX_ORDER = 24
TIKHONOV = 1e-10
PROJECTION_RCOND = 1e-12
DEGENERATE_RATIO = 1e-10
ZERO_COLUMN = 1e-14
RESIDUAL_CSV_HEADER = "M, target_id, residual"

Target = Union[ScalarField, np.ndarray, Callable[[np.ndarray], np.ndarray]]


def trig_traces(mesh: Mesh, order: int) -> List[BoundaryData]:
    """Constant trace plus ``cos(m theta)`` and ``sin(m theta)`` for ``1 <= m <= order``."""

    if not (0 <= order <= MAX_ORDER):
        raise ParameterError(f"trace order must lie in [0, {MAX_ORDER}], got {order}")
    points = mesh.nodes[mesh.boundary_nodes]
    theta = np.arctan2(points[:, 1], points[:, 0])
    traces = [BoundaryData(mesh, np.ones(theta.size), label="1")]
    for m in range(1, order + 1):
        traces.append(BoundaryData(mesh, np.cos(m * theta), label=f"cos{m}"))
        traces.append(BoundaryData(mesh, np.sin(m * theta), label=f"sin{m}"))
    return traces


@dataclass(frozen=True, eq=False)
class ProductFamily:
    """Per-triangle products of trace solutions and their L2 Gram matrix.

    ``cells`` has one row per pair ``i <= j``; products are constant on each triangle.
    """

    mesh: Mesh
    gamma: TensorField
    order: int
    pairs: Tuple[Tuple[int, int], ...]
    labels: Tuple[str, ...]
    cells: np.ndarray
    gram: np.ndarray

    @property
    def size(self) -> int:
        return len(self.pairs)

    def member(self, index: int) -> ScalarField:
        """Member ``index`` averaged onto the nodes."""

        return ScalarField(
            mesh=self.mesh,
            values=self.mesh.cell_to_node(self.cells[index]),
            role=FieldRole.DENSITY,
            label=self.labels[index],
        )

    def gram_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.gram) if self.size else np.zeros(0)


def build_family(mesh: Mesh, gamma: TensorField, order: int, traces: Optional[Sequence[BoundaryData]] = None) -> ProductFamily:
    """Solve the conductivity equation for each trace and form all pairwise products.

    Rank deficiency is allowed; projections regularize it.
    """

    if gamma.mesh is not mesh:
        raise ParameterError("gamma lives on a different mesh")
    traces = list(traces) if traces is not None else trig_traces(mesh, order)
    voltages = ConductivitySolver(gamma).solve_many(traces)
    pairs: List[Tuple[int, int]] = []
    rows: List[np.ndarray] = []
    for i, left in enumerate(voltages):
        for j in range(i, len(voltages)):
            pairs.append((i, j))
            rows.append(cell_quadratic(mesh, gamma.values, left.values, voltages[j].values))
    cells = np.vstack(rows) if rows else np.zeros((0, mesh.n_triangles))
    gram = (cells * mesh.areas) @ cells.T
    gram = 0.5 * (gram + gram.T)
    labels = tuple(f"{traces[i].label}*{traces[j].label}" for i, j in pairs)
    logger.debug("Built product family of order %d: %d members on %d triangles", order, len(pairs), mesh.n_triangles)
    return ProductFamily(
        mesh=mesh,
        gamma=gamma,
        order=order,
        pairs=tuple(pairs),
        labels=labels,
        cells=cells,
        gram=gram,
    )


def cell_values(mesh: Mesh, target: Target) -> np.ndarray:
    """Per-triangle values of a target, evaluated at centroids when a formula is available."""

    if isinstance(target, ScalarField):
        if target.evaluator is not None:
            return np.asarray(target.evaluator(mesh.centroids), dtype=float)
        return mesh.centroid_values(target.values)
    if callable(target):
        return np.asarray(target(mesh.centroids), dtype=float)
    values = np.asarray(target, dtype=float)
    if values.shape == (mesh.n_triangles,):
        return values
    if values.shape == (mesh.n_nodes,):
        return mesh.centroid_values(values)
    raise ParameterError(f"target of shape {values.shape} matches neither nodes nor triangles")


def _weights(mesh: Mesh, weight: Optional[Target]) -> np.ndarray:
    if weight is None:
        return mesh.areas
    values = cell_values(mesh, weight)
    if values.min() <= 0.0:
        raise ParameterError("inner-product weight must be positive")
    return mesh.areas * values


def _scaled_basis(family: ProductFamily, weights: np.ndarray) -> np.ndarray:
    """Columns ``sqrt(w) B_ij`` normalized to unit length; zero members dropped."""

    basis = family.cells.T * np.sqrt(weights)[:, None]
    if basis.shape[1] == 0:
        return basis
    norms = np.linalg.norm(basis, axis=0)
    keep = norms > ZERO_COLUMN * max(float(norms.max()), 1.0)
    return basis[:, keep] / norms[keep]


def projection_residual(
    target: Target,
    family: ProductFamily,
    *,
    weight: Optional[Target] = None,
    regularization: float = TIKHONOV,
) -> float:
    """``||t - proj t|| / ||t||`` in L2 (optionally weighted), with Tikhonov-filtered projection.

    A zero target returns 0.
    """

    mesh = family.mesh
    weights = _weights(mesh, weight)
    t = np.sqrt(weights) * cell_values(mesh, target)
    norm = float(np.linalg.norm(t))
    if norm == 0.0:
        return 0.0
    basis = _scaled_basis(family, weights)
    if basis.shape[1] == 0:
        return 1.0
    u, s, _ = np.linalg.svd(basis, full_matrices=False)
    filtered = (s * s) / (s * s + regularization)
    coefficients = u.T @ t
    residual = t - u @ (filtered * coefficients)
    return float(np.linalg.norm(residual)) / norm


def orthogonalize(seed: Target, family: ProductFamily, *, weight: Optional[Target] = None) -> np.ndarray:
    """Cell values of ``seed`` minus its least-squares projection on the family span."""

    mesh = family.mesh
    weights = _weights(mesh, weight)
    root = np.sqrt(weights)
    values = cell_values(mesh, seed)
    basis = _scaled_basis(family, weights)
    if basis.shape[1] == 0:
        return values.copy()
    coefficients, *_ = np.linalg.lstsq(basis, root * values, rcond=PROJECTION_RCOND)
    return values - (basis @ coefficients) / root


def orthogonality_defect(field_cells: np.ndarray, family: ProductFamily) -> float:
    """Largest ``|int B_ij g|`` over members, each scaled by ``||B_ij|| ||g||``."""

    areas = family.mesh.areas
    if family.size == 0:
        return 0.0
    pairings = family.cells @ (areas * field_cells)
    member_norms = np.sqrt(np.maximum(np.diag(family.gram), 0.0))
    field_norm = float(np.sqrt(areas @ field_cells**2))
    scale = np.maximum(member_norms * field_norm, np.finfo(float).tiny)
    return float(np.max(np.abs(pairings) / scale))


def pushforward_weight(mesh: Mesh, diffeo: Diffeomorphism) -> np.ndarray:
    """Nodal ``det DF(F^-1 y)``, the weight that makes pushed-forward projections match."""

    return diffeo.determinant(diffeo.inverse(mesh.nodes))


def mesh_to_grid(mesh: Mesh, cells: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Linear interpolation of a per-triangle field (averaged to nodes) onto the grid; zero off the mesh."""

    nodal = mesh.cell_to_node(cells)
    interpolator = LinearNDInterpolator(mesh.nodes, nodal, fill_value=0.0)
    return np.asarray(interpolator(grid.points)).reshape(grid.shape)


@dataclass(frozen=True)
class DecayGap:
    """Fourier decay of a seed and of its orthogonalized version."""

    seed: DecayReport
    orthogonalized: Optional[DecayReport]
    relative_norm: float
    orthogonality: float
    notes: Tuple[str, ...] = ()

    @property
    def degenerate(self) -> bool:
        return self.orthogonalized is None

    @property
    def gap(self) -> Optional[float]:
        """``seed slope - orthogonalized slope``; positive when the orthogonalized field decays faster."""

        if self.orthogonalized is None or self.seed.slope is None or self.orthogonalized.slope is None:
            return None
        return self.seed.slope - self.orthogonalized.slope


def orthogonalized_decay(
    family: ProductFamily,
    seed: Target,
    k_list: Sequence[complex],
    *,
    grid: SpectralGrid,
    potential: Optional[PotentialField] = None,
    transform: Optional[CauchyTransform] = None,
) -> DecayGap:
    """Decay exponents of ``seed`` and of its projection onto the family's orthogonal complement.

    A projected field below ``1e-10 ||seed||`` is reported as degenerate, without an exponent.
    """

    mesh = family.mesh
    potential = potential or zero_potential(grid)
    seed_cells = cell_values(mesh, seed)
    seed_norm = float(np.sqrt(mesh.areas @ seed_cells**2))
    if seed_norm == 0.0:
        raise ParameterError("seed field is zero")
    projected = orthogonalize(seed_cells, family)
    relative = float(np.sqrt(mesh.areas @ projected**2)) / seed_norm
    defect = orthogonality_defect(projected, family)

    seed_report = fourier_decay_probe(
        potential, mesh_to_grid(mesh, seed_cells, grid), k_list, transform=transform, label="seed"
    )
    if relative < DEGENERATE_RATIO:
        logger.warning("Orthogonalized seed vanishes (relative norm %.2e); no exponent reported", relative)
        return DecayGap(
            seed=seed_report,
            orthogonalized=None,
            relative_norm=relative,
            orthogonality=defect,
            notes=("degenerate probe: seed lies in the family span",),
        )
    projected_report = fourier_decay_probe(
        potential, mesh_to_grid(mesh, projected, grid), k_list, transform=transform, label="orthogonalized"
    )
    return DecayGap(seed=seed_report, orthogonalized=projected_report, relative_norm=relative, orthogonality=defect)


@dataclass(frozen=True)
class ResidualRow:
    order: int
    target_id: str
    residual: float


def residual_table(
    mesh: Mesh,
    gamma: TensorField,
    targets: Mapping[str, Target],
    orders: Iterable[int],
) -> List[ResidualRow]:
    """Projection residual of every target for each family order."""

    rows = []
    for order in orders:
        family = build_family(mesh, gamma, order)
        for target_id, target in targets.items():
            rows.append(ResidualRow(order=order, target_id=target_id, residual=projection_residual(target, family)))
    return rows


def write_residual_csv(path: Union[str, Path], rows: Iterable[ResidualRow]) -> Path:
    destination = Path(path)
    destination.parent.mkdir(parents=True, exist_ok=True)
    with destination.open("w", newline="", encoding="utf-8") as handle:
        handle.write(RESIDUAL_CSV_HEADER + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        for row in rows:
            writer.writerow([row.order, row.target_id, f"{row.residual:.12e}"])
    return destination


__all__ = [
    "RESIDUAL_CSV_HEADER",
    "trig_traces",
    "ProductFamily",
    "build_family",
    "cell_values",
    "projection_residual",
    "orthogonalize",
    "orthogonality_defect",
    "pushforward_weight",
    "mesh_to_grid",
    "DecayGap",
    "orthogonalized_decay",
    "ResidualRow",
    "residual_table",
    "write_residual_csv",
]
