"""Pseudo-spectral periodic-box flow and passive-tracer toolkit: a 2-D
solver with cascade diagnostics, closed-form spectral estimates, and a
deterministic CLI."""

from .diagnostics import (
    DiagnosticsRecord,
    FluxParts,
    FluxProfile,
    TimeAverager,
    enstrophy_energy_flux,
    flux_bound_check,
    flux_profile,
    steady_balance_residual,
    tracer_flux,
)
from .fields import (
    SpectralScalarField,
    SpectralVelocityField,
    coeffs_from_physical,
    random_scalar_field,
    random_velocity_field,
    scalar_field,
    to_physical,
    velocity_from_components,
    velocity_from_vorticity,
)
from .grid import WavenumberGrid, make_grid
from .operators import (
    SpectrumTable,
    bilinear_advection,
    collocation_energy,
    dyadic_spectrum,
    inner,
    leray_project,
    parseval_energy,
    shell_filter,
    split_at,
    unit_shell_spectrum,
)
from .solver import (
    CflError,
    ForcingSpec,
    NonFiniteStateError,
    SimState,
    SimulationConfig,
    SimulationError,
    SimulationResult,
    grashof,
    init_state,
    run_simulation,
    step,
)
from .theory import (
    TheoryConstants,
    TheoryInputs,
    TheoryResult,
    classical_spectra,
    dyadic_sum,
    generalized_3d,
    keps_bounds,
    keta_bounds,
    ktheta_2d_large_sc,
    ktheta_2d_moderate,
    ktheta_3d,
    log_corrected_sum,
    phi,
    phi_tilde,
    synthetic_field_from_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "WavenumberGrid",
    "make_grid",
    "SpectralScalarField",
    "SpectralVelocityField",
    "scalar_field",
    "velocity_from_vorticity",
    "velocity_from_components",
    "to_physical",
    "coeffs_from_physical",
    "random_scalar_field",
    "random_velocity_field",
    "inner",
    "parseval_energy",
    "collocation_energy",
    "leray_project",
    "shell_filter",
    "split_at",
    "SpectrumTable",
    "unit_shell_spectrum",
    "dyadic_spectrum",
    "bilinear_advection",
    "ForcingSpec",
    "SimulationConfig",
    "SimState",
    "SimulationError",
    "CflError",
    "NonFiniteStateError",
    "SimulationResult",
    "init_state",
    "step",
    "run_simulation",
    "grashof",
    "TimeAverager",
    "DiagnosticsRecord",
    "tracer_flux",
    "FluxParts",
    "FluxProfile",
    "enstrophy_energy_flux",
    "flux_profile",
    "flux_bound_check",
    "steady_balance_residual",
    "TheoryConstants",
    "TheoryInputs",
    "TheoryResult",
    "dyadic_sum",
    "classical_spectra",
    "ktheta_2d_large_sc",
    "ktheta_2d_moderate",
    "ktheta_3d",
    "generalized_3d",
    "log_corrected_sum",
    "keta_bounds",
    "keps_bounds",
    "phi",
    "phi_tilde",
    "synthetic_field_from_spectrum",
]
