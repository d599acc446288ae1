"""Numeric oracle: exact enumeration of small SK systems plus Gaussian quadrature over couplings."""

from ._kernels import HAVE_NUMBA, backend
from .checks import (
    beta_derivative_check,
    beta_second_derivative_ratio,
    effective_beta,
    effective_beta_check,
    free_energy_probe,
    lambda_derivative_check,
    rate_trend,
)
from .evaluate import (
    averaged_deformed_expect,
    compile_polynomial,
    deformed_expect,
    log_partition_average,
    quenched_expect,
    thermal_expect,
)
from .model import GibbsState, KernelMode, SpinModel, gibbs_state, kernel_matrix, overlap_kernel
from .quadrature import QuadratureSpec

__all__ = [
    "HAVE_NUMBA",
    "GibbsState",
    "KernelMode",
    "QuadratureSpec",
    "SpinModel",
    "averaged_deformed_expect",
    "backend",
    "beta_derivative_check",
    "beta_second_derivative_ratio",
    "compile_polynomial",
    "deformed_expect",
    "effective_beta",
    "effective_beta_check",
    "free_energy_probe",
    "gibbs_state",
    "kernel_matrix",
    "lambda_derivative_check",
    "log_partition_average",
    "overlap_kernel",
    "quenched_expect",
    "rate_trend",
    "thermal_expect",
]
