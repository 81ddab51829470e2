"""
Gaussian likelihood oracle and post-fit diagnostics.

The likelihood never forms the p x p covariance: with Lambda_z = Psi^-1 Lambda
and M = I + Lambda_z' Lambda_z the Woodbury identity gives

    log|Sigma| = sum_j log psi2_j + log|M|
    x' Sigma^-1 x = ||z||^2 - (Lambda_z' z)' M^-1 (Lambda_z' z)

for z = Psi^-1 x, so one evaluation costs O(npk + k^3).
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import scipy.linalg
import structlog
from numpy.typing import ArrayLike, NDArray

from randfa.core.exceptions import InvalidInputError, NumericalError
from randfa.models.data import DataMatrix
from randfa.models.fa_model import FaModel
from randfa.models.scores import ResidualSummary
from randfa.services.estimator import (
    EstimatingResidual,
    HeywoodReport,
    estimating_residual,
    heywood_report,
    sample_variances,
)
from randfa.services.scores import bartlett_scores
from randfa.services.svd_engine import rescale_columns

logger = structlog.get_logger(__name__)

_LOG_2PI = float(np.log(2.0 * np.pi))


def gaussian_loglik(x: DataMatrix, lam: ArrayLike, psi2: ArrayLike, *, ddof: int = 0) -> float:
    """Log-likelihood of the rows of x under N(0, Lambda Lambda' + Psi^2).

    ``ddof=0`` counts n observations. ``ddof=1`` is the likelihood of a
    centered sample, with n-1 degrees of freedom in the normalizing terms;
    its stationary points are those of the n-1 estimating equations.
    """
    lam = np.asarray(lam, dtype=np.float64)
    psi2 = np.asarray(psi2, dtype=np.float64)
    if lam.ndim == 1 and lam.size == 0:
        lam = np.zeros((x.p, 0))
    if lam.ndim != 2 or lam.shape[0] != x.p:
        raise InvalidInputError(f"loadings of shape {lam.shape} do not match p={x.p}")
    if ddof not in (0, 1):
        raise InvalidInputError(f"ddof must be 0 or 1, got {ddof}")

    z = rescale_columns(x.values, psi2)
    dof = x.n - ddof
    quadratic = float(np.einsum("ij,ij->", z, z))
    log_det = float(np.sum(np.log(psi2)))

    k = lam.shape[1]
    if k:
        lam_z = lam / np.sqrt(psi2)[:, None]
        inner = np.eye(k) + lam_z.T @ lam_z
        try:
            factor = scipy.linalg.cho_factor(inner)
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"I + Lambda_z' Lambda_z is not positive definite: {e}") from e
        projected = z @ lam_z
        quadratic -= float(np.einsum("ij,ij->", projected, scipy.linalg.cho_solve(factor, projected.T).T))
        log_det += 2.0 * float(np.sum(np.log(np.diag(factor[0]))))

    value = -0.5 * (dof * x.p * _LOG_2PI + dof * log_det + quadratic)
    if not np.isfinite(value):
        raise NumericalError("Gaussian log-likelihood is not finite", {"n": x.n, "p": x.p, "k": k})
    return value


def loglik_psi_gradient(
    x: DataMatrix,
    lam: ArrayLike,
    psi2: ArrayLike,
    *,
    ddof: int = 1,
    rel_step: float = 1e-5,
) -> NDArray[np.float64]:
    """Central finite-difference gradient of the log-likelihood in each psi2_j, Lambda held fixed"""
    psi2 = np.asarray(psi2, dtype=np.float64)
    gradient = np.empty_like(psi2)
    for j in range(psi2.size):
        step = rel_step * psi2[j]
        up = psi2.copy()
        down = psi2.copy()
        up[j] += step
        down[j] -= step
        gradient[j] = (
            gaussian_loglik(x, lam, up, ddof=ddof) - gaussian_loglik(x, lam, down, ddof=ddof)
        ) / (2.0 * step)
    return gradient


@dataclass(frozen=True)
class OmegaSummary:
    """Retained eigenvalues against the inverse harmonic mean of psi2_j / S_xx,jj.

    At a solution tr(Omega_z)/k = 1 + (theta - 1) p / k. ``identity_holds``
    is None when the model did not converge and the check is skipped.
    """

    trace_omega: float
    theta: float
    mean_omega: float
    identity_gap: float
    identity_holds: Optional[bool]
    warning: Optional[str] = None


def omega_summary(model: FaModel, sxx_diag: ArrayLike, rtol: float = 1e-8) -> OmegaSummary:
    sxx_diag = np.asarray(sxx_diag, dtype=np.float64)
    if sxx_diag.shape != (model.p,):
        raise InvalidInputError(f"sxx_diag must have length p={model.p}")
    p, k = model.p, model.k
    trace_omega = float(np.sum(model.omega))
    theta = float(np.mean(sxx_diag / model.psi2))
    mean_omega = trace_omega / k
    implied = 1.0 + (theta - 1.0) * p / k
    gap = abs(mean_omega - implied) / max(abs(implied), 1.0)

    if not model.converged:
        return OmegaSummary(
            trace_omega=trace_omega,
            theta=theta,
            mean_omega=mean_omega,
            identity_gap=gap,
            identity_holds=None,
            warning="model did not converge; eigenvalue diagnostics are stale",
        )
    return OmegaSummary(
        trace_omega=trace_omega,
        theta=theta,
        mean_omega=mean_omega,
        identity_gap=gap,
        identity_holds=bool(gap <= rtol),
    )


@dataclass(frozen=True)
class DiagnosticReport:
    """Everything ``randfa diagnose`` prints"""

    estimating: EstimatingResidual
    omega: OmegaSummary
    residuals: ResidualSummary
    heywood: Optional[HeywoodReport]
    loglik: float
    loglik_centered: float
    converged: bool
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        heywood = None
        if self.heywood is not None:
            heywood = {
                "min_psi2": self.heywood.min_psi2,
                "iteration_of_min": self.heywood.iteration_of_min,
                "flagged": self.heywood.flagged,
            }
        return {
            "converged": self.converged,
            "lambda_residual": self.estimating.lambda_residual,
            "psi_residual": self.estimating.psi_residual,
            "trace_omega": self.omega.trace_omega,
            "theta": self.omega.theta,
            "mean_omega": self.omega.mean_omega,
            "omega_identity_gap": self.omega.identity_gap,
            "omega_identity_holds": self.omega.identity_holds,
            "residual_msq_total": self.residuals.total_msq,
            "residual_msq_expected": self.residuals.expected_total,
            "residual_msq_total_corrected": self.residuals.total_msq_corrected,
            "heywood": heywood,
            "gaussian_loglik": self.loglik,
            "gaussian_loglik_centered": self.loglik_centered,
            "warnings": list(self.warnings),
        }

    def lines(self) -> List[str]:
        out = [
            f"converged: {self.converged}",
            f"estimating residuals: lambda {self.estimating.lambda_residual:.3e}, psi2 {self.estimating.psi_residual:.3e}",
            f"tr(Omega_z): {self.omega.trace_omega:.6g}  theta: {self.omega.theta:.6g}  mean omega: {self.omega.mean_omega:.6g}",
            f"sum of residual mean squares: {self.residuals.total_msq:.6g} (p-k = {self.residuals.expected_total})",
        ]
        if self.heywood is not None:
            flag = "HEYWOOD" if self.heywood.flagged else "ok"
            out.append(
                f"min psi2 over iterations: {self.heywood.min_psi2:.6g} at iteration {self.heywood.iteration_of_min} ({flag})"
            )
        out.append(f"Gaussian log-likelihood: {self.loglik:.10g} (centered sample: {self.loglik_centered:.10g})")
        out.extend(f"warning: {message}" for message in self.warnings)
        return out


def diagnose(model: FaModel, x: DataMatrix) -> DiagnosticReport:
    """Check a fitted model against the data it claims to describe"""
    if x.p != model.p:
        raise InvalidInputError(f"data have {x.p} columns, model has p={model.p}")
    sxx = sample_variances(x)
    notes = list(model.warnings)

    summary = omega_summary(model, sxx)
    if summary.warning:
        notes.append(summary.warning)
    elif not summary.identity_holds:
        notes.append(f"tr(Omega_z) identity off by {summary.identity_gap:.3e}")

    heywood = heywood_report(model.trace) if len(model.trace) else None
    if heywood is not None and heywood.flagged:
        notes.append(f"non-positive unique variance at iteration {heywood.iteration_of_min}")

    report = DiagnosticReport(
        estimating=estimating_residual(x, model.lam, model.psi2),
        omega=summary,
        residuals=bartlett_scores(model, x).residuals,
        heywood=heywood,
        loglik=gaussian_loglik(x, model.lam, model.psi2),
        loglik_centered=gaussian_loglik(x, model.lam, model.psi2, ddof=1),
        converged=model.converged,
        warnings=notes,
    )
    logger.info(
        "Diagnostics computed",
        converged=model.converged,
        theta=summary.theta,
        residual_msq_total=report.residuals.total_msq,
    )
    return report
