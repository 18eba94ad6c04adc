"""Metric-aware deconvolution of first moments of Gaussian bosonic fields."""

__version__ = "0.1.0"

from .adjoint import (
    MetricKind,
    ReconstructionKernel,
    adjointness_residual,
    petz_covariance_recovery,
    transpose_kernel,
    transpose_kernel_bures,
    transpose_kernel_sqrt,
)
from .field import FieldData, FieldModel, kernel_spectrum, reconstruct, simulate_measurement
from .gaussian import (
    GaussianChannel,
    GaussianState,
    apply_channel,
    thermal_covariance,
    validate_channel,
    validate_state,
)
from .recon import ReconstructionMethod, moment_reconstruction_matrix, reconstruct_moments
from .symplectic import standard_symplectic_form, williamson

__all__ = [
    "FieldData",
    "FieldModel",
    "GaussianChannel",
    "GaussianState",
    "MetricKind",
    "ReconstructionKernel",
    "ReconstructionMethod",
    "adjointness_residual",
    "apply_channel",
    "kernel_spectrum",
    "moment_reconstruction_matrix",
    "petz_covariance_recovery",
    "reconstruct",
    "reconstruct_moments",
    "simulate_measurement",
    "standard_symplectic_form",
    "thermal_covariance",
    "transpose_kernel",
    "transpose_kernel_bures",
    "transpose_kernel_sqrt",
    "validate_channel",
    "validate_state",
    "williamson",
]
