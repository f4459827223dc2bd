"""Exception hierarchy for electroheat."""

from __future__ import annotations


class ElectroheatError(Exception):
    """Base exception for all electroheat failures."""


class ParameterError(ElectroheatError, ValueError):
    """Raised when an argument is outside its documented range."""


class MeshError(ElectroheatError):
    """Raised when a mesh violates one of its structural invariants."""


class DiffeomorphismError(ElectroheatError):
    """Raised when a bump diffeomorphism cannot be constructed."""


class SingularJacobianError(ElectroheatError):
    """Raised when a jacobian determinant is non-positive at an evaluation point."""


class DomainError(ElectroheatError, ValueError):
    """Raised when a closed-form coefficient leaves its admissible domain."""


class SolverError(ElectroheatError):
    """Raised when a sparse linear solve fails."""


class EigenSolverError(ElectroheatError):
    """Raised when the generalized eigensolver does not converge."""


class ConvergenceError(ElectroheatError):
    """Raised when a time-asymptotic quantity does not settle before its cap."""


class KTooSmallError(ElectroheatError):
    """Raised when the CGO Neumann series stops contracting."""


class ConfigError(ElectroheatError):
    """Raised for invalid experiment configuration."""


__all__ = [
    "ElectroheatError",
    "ParameterError",
    "MeshError",
    "DiffeomorphismError",
    "SingularJacobianError",
    "DomainError",
    "SolverError",
    "EigenSolverError",
    "ConvergenceError",
    "KTooSmallError",
    "ConfigError",
]
