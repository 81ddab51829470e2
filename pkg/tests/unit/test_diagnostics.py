"""
Tests for the likelihood oracle and post-fit diagnostics
"""

import json

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from randfa.core.exceptions import InvalidInputError
from randfa.models import DataMatrix, FaModel
from randfa.services.diagnostics import (
    diagnose,
    gaussian_loglik,
    loglik_psi_gradient,
    omega_summary,
)
from randfa.services.estimator import initial_psi2, lambda_from_svd
from randfa.services.svd_engine import scaled_data, truncated_svd

pytestmark = pytest.mark.unit


class TestGaussianLoglik:
    def test_univariate_pure_noise(self):
        x = DataMatrix.from_array([[-1.0], [1.0]])
        sigma2 = 2.5
        expected = -0.5 * 2 * np.log(2 * np.pi * sigma2) - (1.0 + 1.0) / (2 * sigma2)
        assert gaussian_loglik(x, np.zeros((1, 1)), [sigma2]) == pytest.approx(expected, rel=1e-14)
        assert gaussian_loglik(x, np.zeros((1, 0)), [sigma2]) == pytest.approx(expected, rel=1e-14)

    def test_matches_dense_covariance(self, rng):
        x = DataMatrix.from_array(rng.standard_normal((20, 5)))
        lam = rng.standard_normal((5, 2))
        psi2 = rng.uniform(0.5, 2.0, size=5)
        sigma = lam @ lam.T + np.diag(psi2)
        dense = multivariate_normal(mean=np.zeros(5), cov=sigma).logpdf(x.values).sum()
        assert gaussian_loglik(x, lam, psi2) == pytest.approx(dense, abs=1e-8)

    def test_centered_form_uses_n_minus_one_degrees_of_freedom(self, rng):
        x = DataMatrix.from_array(rng.standard_normal((10, 3)))
        lam = np.zeros((3, 1))
        psi2 = np.ones(3)
        difference = gaussian_loglik(x, lam, psi2) - gaussian_loglik(x, lam, psi2, ddof=1)
        assert difference == pytest.approx(-0.5 * 3 * np.log(2 * np.pi), rel=1e-12)

    def test_rejects_shape_mismatch(self, rng):
        x = DataMatrix.from_array(rng.standard_normal((10, 3)))
        with pytest.raises(InvalidInputError):
            gaussian_loglik(x, np.zeros((4, 1)), np.ones(3))

    def test_converged_fit_is_stationary_in_psi2(self, strong_sim, strong_fit):
        gradient = loglik_psi_gradient(strong_sim.data, strong_fit.lam, strong_fit.psi2)
        assert np.max(np.abs(gradient)) <= 1e-3

    def test_fit_improves_on_the_starting_point(self, strong_sim, strong_fit):
        x = strong_sim.data
        psi0 = initial_psi2(x.sample_variances(), strong_fit.config)
        lam0 = lambda_from_svd(psi0, truncated_svd(scaled_data(x, psi0), 2), x.n)
        assert gaussian_loglik(x, strong_fit.lam, strong_fit.psi2, ddof=1) >= gaussian_loglik(x, lam0, psi0, ddof=1)


class TestOmegaSummary:
    def test_rank_one_fixed_point(self):
        model = FaModel.from_parameters([[2.0], [2.0], [2.0]], [1.0, 1.0, 1.0], n_used=50)
        summary = omega_summary(model, [5.0, 5.0, 5.0], rtol=1e-8)
        assert summary.theta == pytest.approx(5.0)
        assert summary.trace_omega == pytest.approx(13.0)
        assert summary.identity_holds

    def test_null_direction(self):
        sxx = np.array([1.5, 2.0, 0.7, 1.1])
        model = FaModel.from_parameters(np.zeros((4, 2)), sxx, n_used=30)
        summary = omega_summary(model, sxx, rtol=1e-8)
        assert summary.theta == pytest.approx(1.0)
        assert summary.trace_omega == pytest.approx(2.0)
        assert summary.identity_holds

    def test_default_tolerance_catches_small_gaps(self):
        model = FaModel.from_parameters([[2.0], [2.0], [2.0]], [1.0, 1.0, 1.0], n_used=50)
        # theta off by 1e-7: relative gap about 2.3e-8
        sxx = [5.0 + 1e-7] * 3
        assert not omega_summary(model, sxx).identity_holds
        assert omega_summary(model, sxx, rtol=1e-6).identity_holds

    def test_unconverged_model_is_flagged_stale(self):
        model = FaModel.from_parameters([[2.0], [2.0], [2.0]], [1.0, 1.0, 1.0], n_used=50, converged=False)
        summary = omega_summary(model, [5.0, 5.0, 5.0])
        assert summary.identity_holds is None
        assert "stale" in summary.warning

    def test_converged_fit_satisfies_identity(self, strong_sim, strong_fit):
        summary = omega_summary(strong_fit, strong_sim.data.sample_variances())
        assert summary.identity_holds
        assert summary.mean_omega == pytest.approx(summary.trace_omega / 2)


class TestDiagnose:
    def test_report_on_converged_fit(self, strong_sim, strong_fit):
        report = diagnose(strong_fit, strong_sim.data)
        p, k = strong_fit.p, strong_fit.k
        assert report.converged
        assert report.estimating.within(1e-6)
        assert report.residuals.total_msq == pytest.approx(p - k, abs=1e-6 * p)
        assert report.heywood is not None and not report.heywood.flagged
        assert report.loglik_centered > report.loglik
        assert not report.warnings

    def test_report_serializes(self, strong_sim, strong_fit):
        report = diagnose(strong_fit, strong_sim.data)
        payload = json.loads(json.dumps(report.to_dict()))
        assert payload["converged"] is True
        assert payload["residual_msq_expected"] == 8
        assert any(line.startswith("Gaussian log-likelihood") for line in report.lines())

    def test_column_mismatch(self, strong_fit, rng):
        with pytest.raises(InvalidInputError):
            diagnose(strong_fit, DataMatrix.from_array(rng.standard_normal((20, 3))))
