"""
Fixed-point solution of the factor-analysis estimating equations.

Given Psi, the loadings are a truncated PCA of the rescaled data:
Lambda = Psi V_1 (D_1^2/(n-1) - I)^(1/2). Psi^2 is then refreshed from
diag(S_xx) by one of two rules, and the two steps alternate until the
uniquenesses settle and the tail eigenvalues of S_zz sum to p - k.
"""

import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray

from randfa.core.config import settings
from randfa.core.exceptions import (
    DomainError,
    EigenvalueDeficitError,
    HeywoodCaseError,
    InvalidInputError,
    RankAnomalyError,
)
from randfa.core.metrics import FIT_DURATION, FIT_ITERATIONS, FIT_TOTAL, HEYWOOD_FLAGS, metrics_enabled
from randfa.models.data import DataMatrix
from randfa.models.fa_config import FaConfig, UpdateRule
from randfa.models.fa_model import FaModel, IterationRecord, IterationTrace, canonicalize
from randfa.services.svd_engine import TruncatedSvd, scaled_data, truncated_svd

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class EstimatingResidual:
    """How far (Lambda, Psi^2) is from solving both estimating equations"""

    lambda_residual: float
    psi_residual: float

    def within(self, tol: float) -> bool:
        return self.lambda_residual <= tol and self.psi_residual <= tol


@dataclass(frozen=True)
class HeywoodReport:
    """Smallest unique variance seen along a trace"""

    min_psi2: float
    iteration_of_min: int
    flagged: bool


def sample_variances(x: DataMatrix) -> NDArray[np.float64]:
    """diag(S_xx); constant columns are rejected"""
    sxx = x.sample_variances()
    constant = np.flatnonzero(~(sxx > 0))
    if constant.size:
        j = int(constant[0])
        raise DomainError(
            f"column {x.column_names[j]!r} has zero variance",
            {"column": x.column_names[j], "column_index": j},
        )
    return sxx


def initial_psi2(sxx_diag: ArrayLike, config: FaConfig) -> NDArray[np.float64]:
    """Starting uniquenesses: a fraction of each sample variance or literal values"""
    sxx_diag = np.asarray(sxx_diag, dtype=np.float64)
    if config.psi2_init is None:
        return settings.DEFAULT_PSI_INIT_FRACTION * sxx_diag
    if isinstance(config.psi2_init, list):
        psi2 = np.asarray(config.psi2_init, dtype=np.float64)
        if psi2.shape != sxx_diag.shape:
            raise InvalidInputError(f"psi2_init has {psi2.size} entries for p={sxx_diag.size}")
        return psi2
    return float(config.psi2_init) * sxx_diag


def retained_eigenvalues(svd: TruncatedSvd, n: int) -> Tuple[NDArray[np.float64], List[int]]:
    """Omega_z = D_1^2/(n-1), checked to exceed 1.

    Returns the eigenvalues and the indices lying within
    NEAR_BOUNDARY_EIGENVALUE of 1.
    """
    omega = svd.omega(n)
    for j, value in enumerate(omega):
        if not value > 1.0:
            raise EigenvalueDeficitError(j, float(value))
    near = [j for j, value in enumerate(omega) if value - 1.0 <= settings.NEAR_BOUNDARY_EIGENVALUE]
    return omega, near


def lambda_z_from_svd(svd: TruncatedSvd, n: int) -> NDArray[np.float64]:
    """Lambda_z = V_1 (D_1^2/(n-1) - I)^(1/2)"""
    omega, _ = retained_eigenvalues(svd, n)
    return svd.v1 * np.sqrt(omega - 1.0)


def lambda_from_svd(psi2: ArrayLike, svd: TruncatedSvd, n: int) -> NDArray[np.float64]:
    """Lambda = Psi Lambda_z"""
    psi2 = np.asarray(psi2, dtype=np.float64)
    if psi2.shape != (svd.p,):
        raise InvalidInputError(f"psi2 must have length {svd.p}")
    return np.sqrt(psi2)[:, None] * lambda_z_from_svd(svd, n)


def psi_step_subtract(
    sxx_diag: ArrayLike, psi2: ArrayLike, svd: TruncatedSvd, n: int
) -> NDArray[np.float64]:
    """psi2_j = S_xx,jj - (Lambda Lambda')_jj with Lambda from the current Psi"""
    sxx_diag = np.asarray(sxx_diag, dtype=np.float64)
    lam = lambda_from_svd(psi2, svd, n)
    return sxx_diag - np.einsum("ij,ij->i", lam, lam)


def psi_step_rescale(sxx_diag: ArrayLike, svd: TruncatedSvd, n: int) -> NDArray[np.float64]:
    """psi2_j = S_xx,jj / (1 + (Lambda_z Lambda_z')_jj); positive for any Lambda_z"""
    sxx_diag = np.asarray(sxx_diag, dtype=np.float64)
    if not np.all(sxx_diag > 0):
        j = int(np.flatnonzero(~(sxx_diag > 0))[0])
        raise DomainError(f"sample variance of column {j} is not positive (constant column)", {"column_index": j})
    lam_z = lambda_z_from_svd(svd, n)
    return sxx_diag / (1.0 + np.einsum("ij,ij->i", lam_z, lam_z))


def estimating_residual(x: DataMatrix, lam: ArrayLike, psi2: ArrayLike) -> EstimatingResidual:
    """Distance of (Lambda, Psi^2) from the Lambda-equation and the diag-equation"""
    lam = np.asarray(lam, dtype=np.float64)
    psi2 = np.asarray(psi2, dtype=np.float64)
    if lam.ndim != 2 or lam.shape[0] != x.p or psi2.shape != (x.p,):
        raise InvalidInputError(
            f"parameter shapes {lam.shape}, {psi2.shape} do not match p={x.p}"
        )
    if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(psi2))):
        raise InvalidInputError("parameters must be finite")

    k = lam.shape[1]
    n = x.n
    if k:
        svd = truncated_svd(scaled_data(x, psi2), k)
        # evaluation only: a deficit shows up as a large residual, not an error
        spread = np.sqrt(np.clip(svd.omega(n) - 1.0, 0.0, None))
        lam_hat = np.sqrt(psi2)[:, None] * svd.v1 * spread
        gap = canonicalize(lam, psi2) - canonicalize(lam_hat, psi2)
        lambda_residual = float(np.linalg.norm(gap) / (1.0 + np.linalg.norm(lam)))
    else:
        scaled_data(x, psi2)
        lambda_residual = 0.0

    sxx = sample_variances(x)
    implied = sxx - np.einsum("ij,ij->i", lam, lam)
    psi_residual = float(np.max(np.abs(psi2 - implied) / sxx))
    return EstimatingResidual(lambda_residual=lambda_residual, psi_residual=psi_residual)


def _checked_svd(x: DataMatrix, psi2: NDArray[np.float64], k: int, iteration: int) -> TruncatedSvd:
    svd = truncated_svd(scaled_data(x, psi2), k)
    positive = svd.positive_count()
    if positive < k:
        raise RankAnomalyError(
            f"only {positive} positive singular values for k={k} (rank bound {svd.rank_bound})",
            {"iteration": iteration, "positive": positive, "k": k},
        )
    return svd


def fit(x: DataMatrix, config: FaConfig) -> FaModel:
    """Alternate the Lambda-equation and the Psi^2 update until convergence.

    Convergence needs both the largest relative change of psi2 below
    ``tol_psi`` and |tr(D_2^2)/(n-1) - (p-k)| <= tol_trace * p. When
    ``max_iter`` runs out the last iterate is returned unconverged.
    """
    if not x.centered:
        raise InvalidInputError("data must be column-centered")
    n, p = x.shape
    k = config.k
    config.check_dimensions(n, p)
    rule = UpdateRule(config.rule)
    log = logger.bind(n=n, p=p, k=k, rule=rule.value)

    start = time.perf_counter()
    sxx = sample_variances(x)
    psi2 = initial_psi2(sxx, config)
    trace = IterationTrace()
    converged = False
    notes: List[str] = []

    try:
        for iteration in range(1, config.max_iter + 1):
            svd = _checked_svd(x, psi2, k, iteration)
            try:
                omega, _ = retained_eigenvalues(svd, n)
            except EigenvalueDeficitError as e:
                e.context["iteration"] = iteration
                raise

            if rule is UpdateRule.SUBTRACT:
                updated = psi_step_subtract(sxx, psi2, svd, n)
            else:
                updated = psi_step_rescale(sxx, svd, n)

            tail_sum = svd.tail_sum_sq / (n - 1)
            rel_change = float(np.max(np.abs(updated - psi2) / psi2))
            record = IterationRecord(
                iter_index=iteration,
                tail_sum=tail_sum,
                min_psi2=float(updated.min()),
                max_psi2=float(updated.max()),
                psi2_rel_change=rel_change,
                omega_min=float(omega.min()),
            )
            trace = trace.appended(record)
            log.debug(
                "Fixed-point step",
                iteration=iteration,
                tail_sum=tail_sum,
                min_psi2=record.min_psi2,
                rel_change=rel_change,
            )

            if not np.all(updated > 0):
                j = int(np.argmin(updated))
                raise HeywoodCaseError(
                    f"uniqueness of column {x.column_names[j]!r} became {updated[j]:.3g} at iteration {iteration}",
                    {"iteration": iteration, "column_index": j},
                )
            psi2 = updated

            if rel_change < config.tol_psi and abs(tail_sum - (p - k)) <= config.tol_trace * p:
                converged = True
                break

        # loadings from the final Psi, so the Lambda-equation holds exactly
        svd = _checked_svd(x, psi2, k, len(trace) + 1)
        _, near = retained_eigenvalues(svd, n)
        lam = canonicalize(lambda_from_svd(psi2, svd, n), psi2)
    except Exception:
        if metrics_enabled():
            FIT_TOTAL.labels(rule=rule.value, status="error").inc()
        raise

    if near:
        message = f"retained eigenvalues {near} are within {settings.NEAR_BOUNDARY_EIGENVALUE:g} of 1; loading columns are near zero"
        notes.append(message)
        log.warning("Near-boundary eigenvalues", indices=near)
    if not converged:
        notes.append(f"no convergence within max_iter={config.max_iter}")
        log.warning("Fit did not converge", iterations=len(trace), last_change=trace.last.psi2_rel_change)

    lam_z = lam / np.sqrt(psi2)[:, None]
    omega = np.einsum("ij,ij->j", lam_z, lam_z) + 1.0

    duration = time.perf_counter() - start
    if metrics_enabled():
        FIT_TOTAL.labels(rule=rule.value, status="converged" if converged else "not_converged").inc()
        FIT_ITERATIONS.labels(rule=rule.value).observe(len(trace))
        FIT_DURATION.labels(rule=rule.value).observe(duration)
    log.info("Fit finished", converged=converged, iterations=len(trace), duration=duration)

    return FaModel(
        lam=lam,
        psi2=psi2,
        omega=omega,
        n_used=n,
        converged=converged,
        trace=trace,
        config=config,
        column_names=x.column_names,
        column_scales=x.column_scales,
        column_means=x.column_means,
        data_fingerprint=x.fingerprint(),
        warnings=tuple(notes),
    )


def heywood_report(trace: IterationTrace) -> HeywoodReport:
    """Smallest min_psi2 over the iterations, flagged when not positive"""
    if not len(trace):
        raise InvalidInputError("trace is empty")
    values = trace.column("min_psi2")
    position = int(np.argmin(values))
    report = HeywoodReport(
        min_psi2=float(values[position]),
        iteration_of_min=trace[position].iter_index,
        flagged=bool(values[position] <= 0),
    )
    if report.flagged and metrics_enabled():
        HEYWOOD_FLAGS.inc()
    return report


def refit_from(model: FaModel, x: DataMatrix, config: Optional[FaConfig] = None) -> FaModel:
    """Fit again starting from the model's uniquenesses"""
    base = config or model.config or FaConfig(k=model.k)
    return fit(x, base.model_copy(update={"psi2_init": model.psi2.tolist()}))
