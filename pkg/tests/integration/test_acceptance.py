"""
Behavioral acceptance checks on simulated data at desk scale
"""

import sys

import numpy as np
import pytest

from randfa.models import FaConfig, SimSpec, UpdateRule
from randfa.repositories import write_trace_csv
from randfa.services import (
    bartlett_scores,
    default_sim_spec,
    emit_convergence_plots,
    fit,
    gaussian_loglik,
    initial_psi2,
    lambda_from_svd,
    loglik_psi_gradient,
    omega_summary,
    procrustes_mse,
    psi_step_rescale,
    psi_step_subtract,
    scaled_data,
    simulate,
    simulate_with_truth,
    truncated_svd,
)

pytestmark = pytest.mark.integration

WIDE_P, WIDE_N = 2000, 22
ITERATION_LIMITS = {2: 15, 5: 40, 10: 40, 12: 40}
DISTRIBUTIONS = ["gaussian", "uniform_scaled", "student_t(5)"]


def _wide_fit(k, dist="gaussian", seed=0):
    spec = default_sim_spec(p=WIDE_P, n=WIDE_N, k=k, seed=seed, factor_dist=dist, noise_dist=dist)
    return fit(simulate(spec), FaConfig(k=k))


@pytest.mark.slow
@pytest.mark.parametrize("dist", DISTRIBUTIONS)
@pytest.mark.parametrize("k", [2, 5, 10, 12])
def test_wide_data_converge_quickly_without_heywood_cases(k, dist):
    model = _wide_fit(k, dist)
    assert model.converged
    assert len(model.trace) <= ITERATION_LIMITS[k]
    # tail eigenvalues of the rescaled covariance account for the p - k unit noise directions
    assert abs(model.trace.last.tail_sum - (WIDE_P - k)) <= 1e-6 * WIDE_P
    assert np.min(model.trace.column("min_psi2")) > 1e-12
    assert np.all(model.omega > 1.0)


def test_gaussian_fit_is_a_likelihood_stationary_point(strong_spec):
    x = simulate(strong_spec.model_copy(update={"n": 2000, "seed": 5}))
    config = FaConfig(k=2, max_iter=5000)
    model = fit(x, config)
    assert model.converged

    gradient = loglik_psi_gradient(x, model.lam, model.psi2, ddof=1)
    assert np.max(np.abs(gradient)) <= 1e-3

    psi0 = initial_psi2(x.sample_variances(), config)
    lam0 = lambda_from_svd(psi0, truncated_svd(scaled_data(x, psi0), 2), x.n)
    assert gaussian_loglik(x, model.lam, model.psi2, ddof=1) > gaussian_loglik(x, lam0, psi0, ddof=1)


def test_exact_rank_one_moments_are_a_fixed_point(rank_one_data):
    x = rank_one_data
    psi2 = np.ones(3)
    sxx = x.sample_variances()
    svd = truncated_svd(scaled_data(x, psi2), 1)
    np.testing.assert_allclose(psi_step_subtract(sxx, psi2, svd, x.n), psi2, atol=1e-10)
    np.testing.assert_allclose(psi_step_rescale(sxx, svd, x.n), psi2, atol=1e-10)
    np.testing.assert_allclose(np.abs(lambda_from_svd(psi2, svd, x.n)), 2.0, atol=1e-10)


@pytest.mark.slow
def test_score_precision_grows_with_p():
    finals = []
    monotone = 0
    for seed in range(3):
        errors = []
        for p in (100, 500, 2000):
            truth = simulate_with_truth(default_sim_spec(p=p, n=WIDE_N, k=2, seed=seed))
            model = fit(truth.data, FaConfig(k=2))
            scores = bartlett_scores(model, truth.data).scores
            errors.append(procrustes_mse(scores, truth.factors))
        monotone += int(errors[0] > errors[1] > errors[2])
        finals.append(errors[-1])
    assert monotone >= 2
    assert max(finals) <= 0.05


@pytest.mark.slow
@pytest.mark.parametrize("dist", DISTRIBUTIONS)
def test_covariance_estimate_is_consistent_without_normality(dist, strong_spec):
    lam = np.asarray(strong_spec.lambda_true)
    sigma = lam @ lam.T + np.diag(strong_spec.psi2_true)
    errors = []
    for n in (200, 2000, 20000):
        spec = SimSpec(
            lambda_true=strong_spec.lambda_true,
            psi2_true=strong_spec.psi2_true,
            n=n,
            seed=7,
            factor_dist=dist,
            noise_dist=dist,
        )
        model = fit(simulate(spec), FaConfig(k=2, max_iter=5000))
        assert model.converged
        sigma_hat = model.lam @ model.lam.T + np.diag(model.psi2)
        errors.append(np.linalg.norm(sigma_hat - sigma) / np.linalg.norm(sigma))
    assert errors[0] > errors[1] > errors[2]


@pytest.mark.slow
def test_omega_trace_grows_with_the_number_of_variables():
    x = simulate(default_sim_spec(p=WIDE_P, n=WIDE_N, k=2, seed=1))
    traces = []
    for size in (500, 1000, 2000):
        subset = x.select_columns(range(size))
        model = fit(subset, FaConfig(k=2))
        assert model.converged
        summary = omega_summary(model, subset.sample_variances())
        assert summary.identity_holds
        traces.append(summary.trace_omega)
    ratios = np.array(traces[1:]) / np.array(traces[:-1])
    # roughly linear in p: each doubling of the columns about doubles the trace
    assert np.all((ratios > 1.5) & (ratios < 2.5))


@pytest.mark.parametrize("rule", list(UpdateRule))
def test_fit_is_equivariant_under_column_scaling(rule):
    x = simulate(default_sim_spec(p=200, n=WIDE_N, k=2, seed=3))
    d = np.linspace(0.1, 10.0, x.p)
    config = FaConfig(k=2, rule=rule)
    base = fit(x, config)
    scaled = fit(x.scale_columns(d), config)
    expected_lam = d[:, None] * base.lam
    np.testing.assert_allclose(scaled.lam, expected_lam, rtol=1e-6, atol=1e-6 * np.max(np.abs(expected_lam)))
    np.testing.assert_allclose(scaled.psi2, d**2 * base.psi2, rtol=1e-6)


def test_truncated_svd_matches_full_decomposition(rng):
    for _ in range(20):
        n, p = rng.integers(3, 13, size=2)
        k = int(rng.integers(1, min(n, p)))
        z = rng.standard_normal((n, p))
        u, s, vt = np.linalg.svd(z, full_matrices=False)
        result = truncated_svd(z, k)
        reference = (u[:, :k] * s[:k]) @ vt[:k]
        np.testing.assert_allclose(result.reconstruction(), reference, atol=1e-8)
        assert result.tail_sum_sq == pytest.approx(np.sum(s[k:] ** 2), abs=1e-8)


def test_runs_without_a_plotting_backend(monkeypatch, strong_fit, tmp_path):
    monkeypatch.setitem(sys.modules, "matplotlib", None)
    assert emit_convergence_plots(strong_fit.trace, tmp_path / "fit", k=strong_fit.k, p=strong_fit.p) == []
    assert write_trace_csv(tmp_path / "trace.csv", strong_fit.trace).exists()
    assert not list(tmp_path.glob("fit_*"))
