"""Shared fixtures: coarse disk meshes and a small spectral grid."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from electroheat.mesh import build_disk_mesh  # noqa: E402
from electroheat.models import BoundaryData, CoefficientTriple  # noqa: E402
from electroheat.spectral import SpectralGrid  # noqa: E402


def pytest_configure(config: pytest.Config) -> None:
    config.addinivalue_line("markers", "slow: long-running accuracy checks")


@pytest.fixture(scope="session")
def coarse_mesh():
    return build_disk_mesh(0.2)


@pytest.fixture(scope="session")
def mesh():
    return build_disk_mesh(0.1)


@pytest.fixture(scope="session")
def unit_triple(mesh):
    return CoefficientTriple.unit(mesh)


@pytest.fixture
def x_trace(mesh):
    return BoundaryData.from_function(mesh, lambda x, y: x, label="x")


@pytest.fixture(scope="session")
def grid():
    return SpectralGrid(2.0, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
