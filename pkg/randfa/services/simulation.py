"""
Synthetic data from the factor model X = F Lambda' + E Psi
"""

from dataclasses import dataclass
from typing import Any, Mapping, Union

import numpy as np
import structlog
from numpy.typing import NDArray
from pydantic import ValidationError

from randfa.core.exceptions import InvalidInputError
from randfa.models.data import DataMatrix
from randfa.models.simulation import DistributionKind, DistributionSpec, SimSpec

logger = structlog.get_logger(__name__)

# column l is scaled by _LOADING_SCALE * (1 - _COLUMN_STEP * l): every factor
# stays well above the p/(n-1) noise level and the column strengths are distinct
_LOADING_SCALE = 1.5
_COLUMN_STEP = 0.03
_PSI2_RANGE = (0.3, 3.0)


@dataclass(frozen=True)
class SimulationResult:
    """Centered data together with the draws that produced them"""

    data: DataMatrix
    factors: NDArray[np.float64]
    noise: NDArray[np.float64]
    spec: SimSpec


def standardized_draws(
    rng: np.random.Generator, dist: DistributionSpec, size: tuple
) -> NDArray[np.float64]:
    """Mean 0, variance 1 draws from the requested family"""
    kind = DistributionKind(dist.kind)
    if kind is DistributionKind.GAUSSIAN:
        return rng.standard_normal(size)
    if kind is DistributionKind.UNIFORM_SCALED:
        bound = np.sqrt(3.0)
        return rng.uniform(-bound, bound, size)
    df = float(dist.df)
    return rng.standard_t(df, size) * np.sqrt((df - 2.0) / df)


def simulate_with_truth(spec: SimSpec) -> SimulationResult:
    """Draw F and E from independent child streams of the seed.

    The factor stream does not depend on p, so the same seed and n give the
    same F whatever the number of variables.
    """
    lam = np.asarray(spec.lambda_true, dtype=np.float64)
    psi = np.sqrt(np.asarray(spec.psi2_true, dtype=np.float64))
    factor_seq, noise_seq = np.random.SeedSequence(spec.seed).spawn(2)

    factors = standardized_draws(np.random.default_rng(factor_seq), spec.factor_dist, (spec.n, spec.k))
    noise = standardized_draws(np.random.default_rng(noise_seq), spec.noise_dist, (spec.n, spec.p)) * psi
    values = factors @ lam.T + noise

    logger.debug(
        "Simulated data",
        n=spec.n,
        p=spec.p,
        k=spec.k,
        seed=spec.seed,
        factor_dist=spec.factor_dist.label(),
        noise_dist=spec.noise_dist.label(),
    )
    return SimulationResult(data=DataMatrix.from_array(values), factors=factors, noise=noise, spec=spec)


def simulate(spec: SimSpec) -> DataMatrix:
    """Column-centered sample of size n from the model in ``spec``"""
    return simulate_with_truth(spec).data


def sim_spec_from_dict(payload: Mapping[str, Any]) -> SimSpec:
    try:
        return SimSpec.model_validate(payload)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "spec"
        raise InvalidInputError(f"invalid simulation spec at {location}: {first['msg']}", {"errors": e.error_count()}) from e


def default_sim_spec(
    p: int,
    n: int,
    k: int,
    seed: int = 0,
    factor_dist: Union[DistributionSpec, str] = "gaussian",
    noise_dist: Union[DistributionSpec, str] = "gaussian",
) -> SimSpec:
    """Gaussian loadings with linearly decreasing column scales and psi2 uniform on [0.3, 3].

    The loadings come from a third child stream of ``seed``, separate from
    the factor and noise streams used by :func:`simulate`.
    """
    if p < 1 or k < 1:
        raise InvalidInputError(f"need p >= 1 and k >= 1, got p={p}, k={k}")
    _, _, loading_seq = np.random.SeedSequence(seed).spawn(3)
    rng = np.random.default_rng(loading_seq)
    scales = _LOADING_SCALE * np.maximum(1.0 - _COLUMN_STEP * np.arange(k), 0.25)
    lam = rng.standard_normal((p, k)) * scales
    psi2 = rng.uniform(*_PSI2_RANGE, size=p)
    return sim_spec_from_dict(
        {
            "lambda_true": lam.tolist(),
            "psi2_true": psi2.tolist(),
            "n": n,
            "factor_dist": factor_dist,
            "noise_dist": noise_dist,
            "seed": seed,
        }
    )
