"""
Estimation, scoring, simulation and diagnostics services
"""

from .diagnostics import (
    DiagnosticReport,
    OmegaSummary,
    diagnose,
    gaussian_loglik,
    loglik_psi_gradient,
    omega_summary,
)
from .estimator import (
    EstimatingResidual,
    HeywoodReport,
    estimating_residual,
    fit,
    heywood_report,
    initial_psi2,
    lambda_from_svd,
    lambda_z_from_svd,
    psi_step_rescale,
    psi_step_subtract,
    refit_from,
    retained_eigenvalues,
    sample_variances,
)
from .plotting import emit_convergence_plots
from .scores import (
    bartlett_scores,
    procrustes_mse,
    score_covariance,
    standardized_residuals,
    thomson_scores,
)
from .simulation import (
    SimulationResult,
    default_sim_spec,
    sim_spec_from_dict,
    simulate,
    simulate_with_truth,
)
from .svd_engine import SvdMethod, TruncatedSvd, rescale_columns, scaled_data, truncated_svd

__all__ = [
    # SVD engine
    "SvdMethod",
    "TruncatedSvd",
    "rescale_columns",
    "scaled_data",
    "truncated_svd",

    # Estimator
    "EstimatingResidual",
    "HeywoodReport",
    "estimating_residual",
    "fit",
    "heywood_report",
    "initial_psi2",
    "lambda_from_svd",
    "lambda_z_from_svd",
    "psi_step_rescale",
    "psi_step_subtract",
    "refit_from",
    "retained_eigenvalues",
    "sample_variances",

    # Scores
    "bartlett_scores",
    "procrustes_mse",
    "score_covariance",
    "standardized_residuals",
    "thomson_scores",

    # Simulation
    "SimulationResult",
    "default_sim_spec",
    "sim_spec_from_dict",
    "simulate",
    "simulate_with_truth",

    # Diagnostics
    "DiagnosticReport",
    "OmegaSummary",
    "diagnose",
    "gaussian_loglik",
    "loglik_psi_gradient",
    "omega_summary",

    # Plotting
    "emit_convergence_plots",
]
