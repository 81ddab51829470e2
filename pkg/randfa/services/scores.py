"""
Factor scores and standardized residuals.

On the training sample the scores come straight from the SVD of
Z = X Psi^-1: Bartlett F = U_1 sqrt(n-1) Omega^(1/2) (Omega - I)^(-1/2)
and Thomson F = Bartlett F (Omega - I) Omega^-1. New data use the
weighted least-squares form X Psi^-2 Lambda (Lambda' Psi^-2 Lambda)^-1.
"""

from typing import Optional

import numpy as np
import scipy.linalg
import structlog
from numpy.typing import ArrayLike, NDArray

from randfa.core.exceptions import DegenerateFactorError, InvalidInputError
from randfa.models.data import DataMatrix
from randfa.models.fa_model import FaModel
from randfa.models.scores import ResidualSummary, ScoreCovariance, ScoreKind, ScoreSet
from randfa.services.svd_engine import rescale_columns, truncated_svd

logger = structlog.get_logger(__name__)


def _check_inputs(model: FaModel, x: DataMatrix) -> None:
    if x.p != model.p:
        raise InvalidInputError(f"data have {x.p} columns, model has p={model.p}")
    if not np.all(model.omega > 1.0):
        j = int(np.argmin(model.omega))
        raise DegenerateFactorError(
            f"factor {j} has omega = {model.omega[j]:.6g} <= 1", {"factor": j}
        )


def _is_training_sample(model: FaModel, x: DataMatrix) -> bool:
    return (
        model.data_fingerprint is not None
        and x.n == model.n_used
        and x.fingerprint() == model.data_fingerprint
    )


def _bartlett_from_svd(model: FaModel, z: NDArray[np.float64], n: int) -> NDArray[np.float64]:
    svd = truncated_svd(z, model.k)
    omega = svd.omega(n)
    if not np.all(omega > 1.0):
        raise DegenerateFactorError("training-sample eigenvalues are not above 1")
    # align each singular pair with the model's loading column
    signs = np.sign(np.einsum("ij,ij->j", svd.v1, model.lambda_z))
    signs[signs == 0] = 1.0
    return (svd.u1 * signs) * np.sqrt((n - 1) * omega / (omega - 1.0))


def _bartlett_regression(model: FaModel, z: NDArray[np.float64]) -> NDArray[np.float64]:
    lam_z = model.lambda_z
    gram = lam_z.T @ lam_z
    try:
        return scipy.linalg.solve(gram, (z @ lam_z).T, assume_a="pos").T
    except np.linalg.LinAlgError as e:
        raise DegenerateFactorError(f"Lambda_z' Lambda_z is singular: {e}") from e


def bartlett_scores(model: FaModel, x: DataMatrix) -> ScoreSet:
    """Weighted least-squares factor scores with their residual summary"""
    _check_inputs(model, x)
    z = rescale_columns(x.values, model.psi2)
    training = _is_training_sample(model, x)
    if training:
        scores = _bartlett_from_svd(model, z, x.n)
    else:
        scores = _bartlett_regression(model, z)
    partial = ScoreSet(scores=scores, kind=ScoreKind.BARTLETT, from_training_svd=training)
    residuals = standardized_residuals(model, x, partial)
    logger.debug("Bartlett scores", n=x.n, k=model.k, training_svd=training)
    return ScoreSet(
        scores=scores,
        kind=ScoreKind.BARTLETT,
        residuals=residuals,
        from_training_svd=training,
    )


def thomson_scores(model: FaModel, x: DataMatrix) -> ScoreSet:
    """Regression (best linear predictor) scores: Bartlett shrunk by (omega-1)/omega"""
    bartlett = bartlett_scores(model, x)
    shrink = (model.omega - 1.0) / model.omega
    return ScoreSet(
        scores=bartlett.scores * shrink,
        kind=ScoreKind.THOMSON,
        from_training_svd=bartlett.from_training_svd,
    )


def standardized_residuals(model: FaModel, x: DataMatrix, scores: ScoreSet) -> ResidualSummary:
    """E_z = Z - F Lambda_z' and per-variable mean squares.

    On the training sample F Lambda_z' equals U_1 D_1 V_1', so E_z is the
    complement of the rank-k part of Z.
    """
    if ScoreKind(scores.kind) is not ScoreKind.BARTLETT:
        raise InvalidInputError("standardized residuals are defined for Bartlett scores only")
    if scores.scores.shape != (x.n, model.k):
        raise InvalidInputError(
            f"scores of shape {scores.scores.shape} do not match n={x.n}, k={model.k}"
        )
    if x.p != model.p:
        raise InvalidInputError(f"data have {x.p} columns, model has p={model.p}")

    z = rescale_columns(x.values, model.psi2)
    residuals = z - scores.scores @ model.lambda_z.T
    msq = np.einsum("ij,ij->j", residuals, residuals) / (x.n - 1)
    p, k = model.p, model.k
    dof_factor = p / (p - k)
    return ResidualSummary(
        residuals=residuals,
        msq=msq,
        msq_corrected=msq * dof_factor,
        total_msq=float(msq.sum()),
        expected_total=p - k,
        dof_factor=dof_factor,
    )


def score_covariance(model: FaModel, psi2_true: Optional[ArrayLike] = None) -> ScoreCovariance:
    """(Lambda_z' Lambda_z)^-1 and, with known true uniquenesses, max_j psi2_j/psi2_hat_j"""
    lam_z = model.lambda_z
    gram = lam_z.T @ lam_z
    diag = np.diag(gram)
    if not np.all(diag > np.finfo(float).eps * max(float(diag.max(initial=0.0)), 1.0)):
        raise DegenerateFactorError("Lambda_z' Lambda_z is singular")
    try:
        covariance = scipy.linalg.inv(gram)
    except np.linalg.LinAlgError as e:
        raise DegenerateFactorError(f"Lambda_z' Lambda_z is singular: {e}") from e

    bound: Optional[float] = None
    if psi2_true is not None:
        truth = np.asarray(psi2_true, dtype=np.float64)
        if truth.shape != (model.p,):
            raise InvalidInputError(f"psi2_true must have length {model.p}")
        bound = float(np.max(truth / model.psi2))
    return ScoreCovariance(covariance=covariance, bound_factor=bound)


def procrustes_mse(estimated: ArrayLike, truth: ArrayLike) -> float:
    """Mean squared error after rotating ``estimated`` onto the centered truth"""
    estimated = np.asarray(estimated, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimated.shape != truth.shape:
        raise InvalidInputError(f"shapes differ: {estimated.shape} vs {truth.shape}")
    # the model only sees centered data, so the factor means are not recoverable
    truth = truth - truth.mean(axis=0)
    rotation, _ = scipy.linalg.orthogonal_procrustes(estimated, truth)
    return float(np.mean((estimated @ rotation - truth) ** 2))
