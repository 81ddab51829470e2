"""
Pytest configuration and fixtures for randfa tests
"""

import numpy as np
import pytest
import scipy.linalg

from randfa.models import DataMatrix, FaConfig, SimSpec
from randfa.services import fit, simulate_with_truth

# well-separated two-factor model with strong loadings on ten variables
STRONG_LAMBDA = [
    [1.0, 0.8],
    [0.9, -0.7],
    [0.8, 0.9],
    [1.1, -0.8],
    [1.2, 0.6],
    [0.7, -0.9],
    [1.0, 0.7],
    [0.9, -0.6],
    [1.1, 0.8],
    [0.8, -0.7],
]
STRONG_PSI2 = [0.5, 0.6, 0.4, 0.7, 0.5, 0.6, 0.45, 0.55, 0.65, 0.5]


def exact_moment_data(sigma: np.ndarray, n: int, seed: int = 0) -> DataMatrix:
    """Centered n x p data whose sample covariance equals ``sigma`` to rounding.

    X = sqrt(n-1) Q L' with Q orthonormal, centered columns and L L' = sigma.
    """
    p = sigma.shape[0]
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, p))
    q, _ = np.linalg.qr(raw - raw.mean(axis=0))
    chol = scipy.linalg.cholesky(sigma, lower=True)
    values = np.sqrt(n - 1) * q @ chol.T
    return DataMatrix(
        values=values,
        column_names=tuple(f"x{j + 1}" for j in range(p)),
        centered=True,
        column_scales=np.ones(p),
    )


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return np.random.default_rng(20240611)


@pytest.fixture
def rank_one_data():
    """Exact moments of lambda = [2, 2, 2], psi2 = [1, 1, 1] with n = 50."""
    lam = np.array([[2.0], [2.0], [2.0]])
    return exact_moment_data(lam @ lam.T + np.eye(3), n=50)


@pytest.fixture
def strong_spec():
    """Two strong factors on ten variables."""
    return SimSpec(lambda_true=STRONG_LAMBDA, psi2_true=STRONG_PSI2, n=500, seed=11)


@pytest.fixture
def strong_sim(strong_spec):
    """Simulated data and truth for the strong two-factor spec."""
    return simulate_with_truth(strong_spec)


@pytest.fixture
def strong_fit(strong_sim):
    """Converged two-factor fit on the strong simulated data."""
    return fit(strong_sim.data, FaConfig(k=2, max_iter=5000))


@pytest.fixture
def csv_file(tmp_path):
    """Write CSV text to a temporary file and return its path."""

    def _write(text: str, name: str = "data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def exact_data():
    """Factory for centered data with a prescribed sample covariance."""
    return exact_moment_data
