"""
Factor score and residual containers
"""

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray


class ScoreKind(str, enum.Enum):
    """Factor score estimator"""
    BARTLETT = "bartlett"
    THOMSON = "thomson"


@dataclass(frozen=True)
class ResidualSummary:
    """Standardized residuals Z - F Lambda_z' and their mean squares.

    ``msq`` divides the column sums of squares by n-1. ``msq_corrected``
    multiplies by p/(p-k) so that each entry is comparable with 1: the raw
    mean squares sum to p-k, not p, at a solution.
    """

    residuals: NDArray[np.float64]
    msq: NDArray[np.float64]
    msq_corrected: NDArray[np.float64]
    total_msq: float
    expected_total: int
    dof_factor: float

    @property
    def total_msq_corrected(self) -> float:
        return float(self.msq_corrected.sum())


@dataclass(frozen=True)
class ScoreSet:
    """n x k factor scores, with residuals for the Bartlett kind"""

    scores: NDArray[np.float64]
    kind: ScoreKind
    residuals: Optional[ResidualSummary] = None
    # True when computed from the training-sample SVD identities
    from_training_svd: bool = False

    @property
    def residuals_z(self) -> Optional[NDArray[np.float64]]:
        return None if self.residuals is None else self.residuals.residuals

    @property
    def residual_msq(self) -> Optional[NDArray[np.float64]]:
        return None if self.residuals is None else self.residuals.msq


@dataclass(frozen=True)
class ScoreCovariance:
    """Conditional covariance (Lambda_z' Lambda_z)^-1 of Bartlett scores.

    ``bound_factor`` is max_j psi2_true_j / psi2_hat_j when the true
    uniquenesses are known (simulation), otherwise None.
    """

    covariance: NDArray[np.float64]
    bound_factor: Optional[float] = None

    @property
    def bound_available(self) -> bool:
        return self.bound_factor is not None

    @property
    def inflated_covariance(self) -> Optional[NDArray[np.float64]]:
        if self.bound_factor is None:
            return None
        return self.covariance * self.bound_factor
