"""
Repository layer for files on disk
"""

from .base import BaseRepository
from .csv_repository import CsvRepository, load_csv, write_matrix_csv, write_trace_csv
from .model_repository import (
    ModelRepository,
    SimSpecRepository,
    load_model,
    load_sim_spec,
    save_model,
)

__all__ = [
    "BaseRepository",
    "CsvRepository",
    "ModelRepository",
    "SimSpecRepository",
    "load_csv",
    "load_model",
    "load_sim_spec",
    "save_model",
    "write_matrix_csv",
    "write_trace_csv",
]
