"""Electroheat package: coupled conductivity/heat forward model and CGO toolkit."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DiffeomorphismError,
    DomainError,
    EigenSolverError,
    ElectroheatError,
    KTooSmallError,
    MeshError,
    ParameterError,
    SingularJacobianError,
    SolverError,
)
from .models import (
    BoundaryData,
    CoefficientTriple,
    Diffeomorphism,
    EigenDecomposition,
    ExcitationSchedule,
    FieldRole,
    FluxTrace,
    MeasurementRecord,
    Mesh,
    ScalarField,
    SourceHistory,
    TemperatureField,
    TensorField,
    VoltageField,
)
from .mesh import build_disk_mesh, read_mesh, validate_mesh, write_mesh
from .geometry import (
    compose,
    determinant_defect,
    identity_diffeo,
    make_bump_diffeo,
    pushforward_kappa,
    pushforward_source,
    pushforward_tensor,
    pushforward_triple,
    random_bump_diffeo,
)
from .catalog import CATALOG, ClosedFormConductivity, build_conductivity
from .elliptic import (
    dn_map,
    dn_pairing,
    energy_density,
    energy_form,
    liouville_potential,
    liouville_residual,
    solve_conductivity,
)
from .heat import (
    assemble_weighted_eigen,
    boundary_heat_flux,
    solve_impulse_response,
    solve_static_heat,
    solve_transient_eigen,
    solve_transient_timestep,
)
from .measurement import (
    energy_recovery_report,
    recover_dn_pairing,
    recover_energy_static,
    separable_source,
    voltage_to_heat_flow,
)
from .spectral import CauchyTransform, SpectralGrid, cauchy_P, cauchy_Pbar
from .cgo import (
    CGOParameters,
    CGOSolution,
    PotentialField,
    build_cgo,
    conductivity_cgo,
    expansion_terms,
    fourier_decay_probe,
    product_modulation,
    solve_conjugated,
)
from .density import ProductFamily, build_family, orthogonalized_decay, projection_residual

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DiffeomorphismError",
    "DomainError",
    "EigenSolverError",
    "ElectroheatError",
    "KTooSmallError",
    "MeshError",
    "ParameterError",
    "SingularJacobianError",
    "SolverError",
    "BoundaryData",
    "CoefficientTriple",
    "Diffeomorphism",
    "EigenDecomposition",
    "ExcitationSchedule",
    "FieldRole",
    "FluxTrace",
    "MeasurementRecord",
    "Mesh",
    "ScalarField",
    "SourceHistory",
    "TemperatureField",
    "TensorField",
    "VoltageField",
    "build_disk_mesh",
    "read_mesh",
    "validate_mesh",
    "write_mesh",
    "compose",
    "determinant_defect",
    "identity_diffeo",
    "make_bump_diffeo",
    "pushforward_kappa",
    "pushforward_source",
    "pushforward_tensor",
    "pushforward_triple",
    "random_bump_diffeo",
    "CATALOG",
    "ClosedFormConductivity",
    "build_conductivity",
    "dn_map",
    "dn_pairing",
    "energy_density",
    "energy_form",
    "liouville_potential",
    "liouville_residual",
    "solve_conductivity",
    "assemble_weighted_eigen",
    "boundary_heat_flux",
    "solve_impulse_response",
    "solve_static_heat",
    "solve_transient_eigen",
    "solve_transient_timestep",
    "energy_recovery_report",
    "recover_dn_pairing",
    "recover_energy_static",
    "separable_source",
    "voltage_to_heat_flow",
    "CauchyTransform",
    "SpectralGrid",
    "cauchy_P",
    "cauchy_Pbar",
    "CGOParameters",
    "CGOSolution",
    "PotentialField",
    "build_cgo",
    "conductivity_cgo",
    "expansion_terms",
    "fourier_decay_probe",
    "product_modulation",
    "solve_conjugated",
    "ProductFamily",
    "build_family",
    "orthogonalized_decay",
    "projection_residual",
]
