"""Triangulation of the unit disk and its plain-text serialization."""

from __future__ import annotations

import math
from collections import Counter
from pathlib import Path
from typing import Dict, Iterator, Mapping, Tuple, Union

import numpy as np
from scipy.spatial import Delaunay

from .errors import MeshError, ParameterError
from .models import Mesh, ScalarField, TensorField
from .utils import get_logger

logger = get_logger(__name__)

H_MIN = 0.005
H_MAX = 0.5
BOUNDARY_RADIUS_TOL = 1e-10
MAX_EDGE_FACTOR = 1.5
# Boundary and near-boundary rings are denser than the interior rings so that
# the polygonal area defect stays below 0.02 h^2.
BOUNDARY_POINTS_PER_RING = 20
COLLAR_POINTS_PER_RING = 12

FORMAT_HEADER = "# electroheat mesh v1"

FieldData = Union[ScalarField, TensorField, np.ndarray]


def _ring(radius: float, count: int, offset: float) -> np.ndarray:
    angles = offset + 2.0 * np.pi * np.arange(count) / count
    return np.column_stack((radius * np.cos(angles), radius * np.sin(angles)))


def _disk_points(n: int) -> Tuple[np.ndarray, int]:
    """Concentric rings with staggered angles; boundary points come last."""

    rings = [np.zeros((1, 2))]
    for j in range(1, n):
        count = 6 * j
        offset = 0.5 * (j % 2) * 2.0 * np.pi / count
        rings.append(_ring(j / n, count, offset))
    rings.append(_ring(1.0 - 0.5 / n, COLLAR_POINTS_PER_RING * n, np.pi / (COLLAR_POINTS_PER_RING * n)))
    boundary_count = BOUNDARY_POINTS_PER_RING * n
    rings.append(_ring(1.0, boundary_count, 0.0))
    return np.vstack(rings), boundary_count


def build_disk_mesh(h_target: float) -> Mesh:
    """Triangulate the closed unit disk with maximum edge length at most ``1.5 * h_target``.

    Args:
        h_target: Mesh-size parameter in ``[0.005, 0.5]``.

    Returns:
        Mesh whose boundary loop runs counterclockwise through nodes on the unit circle.

    Raises:
        ParameterError: If ``h_target`` is out of range.
        MeshError: If the triangulation violates a mesh invariant.
    """

    if not (H_MIN <= h_target <= H_MAX):
        raise ParameterError(f"h_target must lie in [{H_MIN}, {H_MAX}], got {h_target}")

    n = int(math.ceil(1.0 / h_target - 1e-12))
    nodes, boundary_count = _disk_points(n)
    triangles = Delaunay(nodes).simplices.astype(np.int64)

    # Delaunay does not guarantee orientation.
    p0, p1, p2 = (nodes[triangles[:, i]] for i in range(3))
    signed = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
    flip = signed < 0.0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]

    first = nodes.shape[0] - boundary_count
    loop = first + np.arange(boundary_count)
    boundary_edges = np.column_stack((loop, np.roll(loop, -1)))

    mesh = Mesh(nodes=nodes, triangles=triangles, boundary_edges=boundary_edges, h_target=float(h_target))
    validate_mesh(mesh)
    logger.debug(
        "Built disk mesh h=%.4f: %d nodes, %d triangles, %d boundary edges",
        h_target,
        mesh.n_nodes,
        mesh.n_triangles,
        boundary_count,
    )
    return mesh


def _edges(triangles: np.ndarray) -> Iterator[Tuple[int, int]]:
    for tri in triangles:
        a, b, c = (int(v) for v in tri)
        yield (min(a, b), max(a, b))
        yield (min(b, c), max(b, c))
        yield (min(c, a), max(c, a))


def validate_mesh(mesh: Mesh) -> None:
    """Raise MeshError unless every Mesh invariant holds."""

    if np.any(mesh.areas <= 0.0):
        raise MeshError(f"{int(np.sum(mesh.areas <= 0.0))} triangles have non-positive signed area")

    radii = np.linalg.norm(mesh.nodes[mesh.boundary_nodes], axis=1)
    defect = float(np.abs(radii - 1.0).max())
    if defect > BOUNDARY_RADIUS_TOL:
        raise MeshError(f"boundary node off the unit circle by {defect:.3e}")

    counts = Counter(_edges(mesh.triangles))
    if any(count > 2 for count in counts.values()):
        raise MeshError("an edge is shared by more than two triangles")
    open_edges = {edge for edge, count in counts.items() if count == 1}
    loop_edges = {(min(int(a), int(b)), max(int(a), int(b))) for a, b in mesh.boundary_edges}
    if open_edges != loop_edges:
        raise MeshError("boundary edges do not match the edges owned by a single triangle")

    edges = mesh.boundary_edges
    if np.any(edges[:, 1] != np.roll(edges[:, 0], -1)) or np.unique(edges[:, 0]).size != edges.shape[0]:
        raise MeshError("boundary edges do not form a single closed loop")

    longest = max_edge_length(mesh)
    if longest > MAX_EDGE_FACTOR * mesh.h_target:
        raise MeshError(f"longest edge {longest:.4f} exceeds {MAX_EDGE_FACTOR} h = {MAX_EDGE_FACTOR * mesh.h_target:.4f}")


def max_edge_length(mesh: Mesh) -> float:
    xy = mesh.nodes[mesh.triangles]
    lengths = np.linalg.norm(xy - np.roll(xy, -1, axis=1), axis=2)
    return float(lengths.max())


def _field_rows(data: FieldData) -> Tuple[str, np.ndarray]:
    values = np.asarray(data.values if isinstance(data, (ScalarField, TensorField)) else data, dtype=float)
    if values.ndim == 1:
        return "scalar", values[:, None]
    if values.ndim == 3 and values.shape[1:] == (2, 2):
        return "tensor", np.column_stack((values[:, 0, 0], values[:, 0, 1], values[:, 1, 1]))
    raise ParameterError(f"cannot serialize field with shape {values.shape}")


def write_mesh(path: Union[str, Path], mesh: Mesh, fields: Mapping[str, FieldData] | None = None) -> Path:
    """Write the mesh, and optional named per-node fields, in the plain-text format.

    Layout: a header line, ``h_target <h>``, then the sections ``nodes <N>`` ("x y"),
    ``triangles <T>`` ("i j k"), ``boundary_edges <B>`` ("i j") and one
    ``field <name> <scalar|tensor> <N>`` section per field (tensors as "t11 t12 t22").
    """

    destination = Path(path)
    lines = [FORMAT_HEADER, f"h_target {mesh.h_target!r}", f"nodes {mesh.n_nodes}"]
    lines.extend(f"{x!r} {y!r}" for x, y in mesh.nodes.tolist())
    lines.append(f"triangles {mesh.n_triangles}")
    lines.extend(" ".join(str(v) for v in tri) for tri in mesh.triangles.tolist())
    lines.append(f"boundary_edges {mesh.boundary_edges.shape[0]}")
    lines.extend(f"{a} {b}" for a, b in mesh.boundary_edges.tolist())
    for name, data in (fields or {}).items():
        if any(ch.isspace() for ch in name):
            raise ParameterError(f"field name '{name}' must not contain whitespace")
        kind, rows = _field_rows(data)
        if rows.shape[0] != mesh.n_nodes:
            raise ParameterError(f"field '{name}' has {rows.shape[0]} values for {mesh.n_nodes} nodes")
        lines.append(f"field {name} {kind} {rows.shape[0]}")
        lines.extend(" ".join(repr(v) for v in row) for row in rows.tolist())
    destination.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return destination


def read_mesh(path: Union[str, Path]) -> Tuple[Mesh, Dict[str, np.ndarray]]:
    """Read a file written by :func:`write_mesh`.

    Returns:
        The mesh and a mapping from field name to raw nodal arrays
        (``(N,)`` for scalars, ``(N, 2, 2)`` for tensors).
    """

    text = Path(path).read_text(encoding="utf-8").splitlines()
    rows = iter(line for line in text if line.strip() and not line.startswith("#"))

    def section(expected: str) -> Tuple[list[str], int]:
        header = next(rows).split()
        if header[0] != expected:
            raise MeshError(f"expected section '{expected}', found '{header[0]}'")
        return header, int(header[-1])

    try:
        header = next(rows).split()
        if header[0] != "h_target":
            raise MeshError("missing h_target line")
        h_target = float(header[1])
        _, count = section("nodes")
        nodes = np.array([[float(v) for v in next(rows).split()] for _ in range(count)])
        _, count = section("triangles")
        triangles = np.array([[int(v) for v in next(rows).split()] for _ in range(count)], dtype=np.int64)
        _, count = section("boundary_edges")
        edges = np.array([[int(v) for v in next(rows).split()] for _ in range(count)], dtype=np.int64)
        fields: Dict[str, np.ndarray] = {}
        for line in rows:
            parts = line.split()
            if parts[0] != "field":
                raise MeshError(f"unexpected line '{line}'")
            name, kind, count = parts[1], parts[2], int(parts[3])
            block = np.array([[float(v) for v in next(rows).split()] for _ in range(count)])
            if kind == "scalar":
                fields[name] = block[:, 0]
            else:
                tensor = np.empty((count, 2, 2))
                tensor[:, 0, 0] = block[:, 0]
                tensor[:, 0, 1] = tensor[:, 1, 0] = block[:, 1]
                tensor[:, 1, 1] = block[:, 2]
                fields[name] = tensor
    except (StopIteration, ValueError, IndexError) as exc:
        raise MeshError(f"malformed mesh file {path}: {exc}") from exc

    mesh = Mesh(nodes=nodes, triangles=triangles, boundary_edges=edges, h_target=h_target)
    validate_mesh(mesh)
    return mesh, fields


__all__ = ["build_disk_mesh", "validate_mesh", "max_edge_length", "write_mesh", "read_mesh"]
