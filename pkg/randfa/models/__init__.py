"""
Domain types for random-factor analysis
"""

from .data import DataMatrix
from .fa_config import FaConfig, UpdateRule
from .fa_model import (
    TRACE_COLUMNS,
    FaModel,
    IterationRecord,
    IterationTrace,
    canonicalize,
)
from .model_file import SCHEMA_VERSION, ModelFile
from .scores import ResidualSummary, ScoreCovariance, ScoreKind, ScoreSet
from .simulation import DistributionKind, DistributionSpec, SimSpec

__all__ = [
    # Data
    "DataMatrix",

    # Configuration
    "FaConfig",
    "UpdateRule",

    # Fitted model
    "FaModel",
    "IterationRecord",
    "IterationTrace",
    "TRACE_COLUMNS",
    "canonicalize",

    # Persistence schema
    "ModelFile",
    "SCHEMA_VERSION",

    # Scores
    "ResidualSummary",
    "ScoreCovariance",
    "ScoreKind",
    "ScoreSet",

    # Simulation
    "DistributionKind",
    "DistributionSpec",
    "SimSpec",
]
