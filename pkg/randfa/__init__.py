"""
randfa: random-factor analysis by SVD fixed-point iteration
"""

from randfa.core.config import settings
from randfa.models import DataMatrix, FaConfig, FaModel, ScoreKind, ScoreSet, SimSpec, UpdateRule
from randfa.repositories import load_csv, load_model, save_model
from randfa.services import (
    bartlett_scores,
    diagnose,
    fit,
    gaussian_loglik,
    omega_summary,
    simulate,
    thomson_scores,
    truncated_svd,
)

__version__ = settings.APP_VERSION

__all__ = [
    "DataMatrix",
    "FaConfig",
    "FaModel",
    "ScoreKind",
    "ScoreSet",
    "SimSpec",
    "UpdateRule",
    "bartlett_scores",
    "diagnose",
    "fit",
    "gaussian_loglik",
    "load_csv",
    "load_model",
    "omega_summary",
    "save_model",
    "simulate",
    "thomson_scores",
    "truncated_svd",
]
