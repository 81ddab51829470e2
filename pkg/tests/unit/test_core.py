"""
Tests for settings, errors, logging helpers and metrics
"""

import pytest

from randfa.core.config import Settings
from randfa.core.exceptions import (
    DataFormatError,
    DomainError,
    EigenvalueDeficitError,
    FactorAnalysisError,
    InvalidInputError,
    NumericalError,
    SchemaVersionError,
)
from randfa.core.logging import log_error, setup_logging
from randfa.core.metrics import metrics_snapshot

pytestmark = pytest.mark.unit


def test_settings_read_prefixed_environment(monkeypatch):
    monkeypatch.setenv("FA_LOG_LEVEL", "debug")
    monkeypatch.setenv("FA_SVD_THREADS", "2")
    settings = Settings()
    assert settings.LOG_LEVEL == "DEBUG"
    assert settings.SVD_THREADS == 2


def test_settings_reject_zero_threads(monkeypatch):
    monkeypatch.setenv("FA_SVD_THREADS", "0")
    with pytest.raises(ValueError):
        Settings()


@pytest.mark.parametrize(
    "error, code",
    [
        (InvalidInputError("k too large"), 2),
        (DomainError("constant column"), 3),
        (DataFormatError("ragged"), 3),
        (SchemaVersionError("version 2"), 3),
        (NumericalError("no convergence"), 5),
    ],
)
def test_exit_codes(error, code):
    assert isinstance(error, FactorAnalysisError)
    assert error.exit_code == code


def test_eigenvalue_deficit_carries_index():
    error = EigenvalueDeficitError(3, 0.9)
    assert isinstance(error, DomainError)
    assert error.context["index"] == 3


def test_log_error_includes_context(capsys):
    setup_logging("INFO")
    log_error(DataFormatError("bad cell", {"line": 4}), {"command": "fit"})
    err = capsys.readouterr().err
    assert "Command failed" in err
    assert "line" in err and "fit" in err


def test_fit_is_counted(strong_fit):
    assert "randfa_fits_total" in metrics_snapshot()
