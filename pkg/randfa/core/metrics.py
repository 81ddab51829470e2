"""
Prometheus metrics for fits and decompositions
"""

from prometheus_client import REGISTRY, Counter, Histogram, generate_latest

from randfa.core.config import settings

# Estimator Metrics
FIT_TOTAL = Counter(
    "randfa_fits_total",
    "Total factor analysis fits",
    ["rule", "status"]
)

FIT_ITERATIONS = Histogram(
    "randfa_fit_iterations",
    "Fixed-point iterations per fit",
    ["rule"],
    buckets=(1, 2, 5, 10, 15, 20, 30, 40, 60, 100, 200, 500, 1000),
)

FIT_DURATION = Histogram(
    "randfa_fit_duration_seconds",
    "Fit duration in seconds",
    ["rule"]
)

# SVD Engine Metrics
SVD_DURATION = Histogram(
    "randfa_svd_duration_seconds",
    "Truncated SVD duration in seconds",
    ["method"],
    buckets=(0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0),
)

# Diagnostics Metrics
HEYWOOD_FLAGS = Counter(
    "randfa_heywood_flags_total",
    "Traces reporting a non-positive unique variance"
)


def metrics_enabled() -> bool:
    return settings.METRICS_ENABLED


def metrics_snapshot() -> str:
    """Render the default registry in the text exposition format"""
    return generate_latest(REGISTRY).decode("utf-8")
