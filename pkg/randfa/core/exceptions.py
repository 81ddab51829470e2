"""
Error hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI reports for it and an
optional structured context that ends up in the log record.
"""

from typing import Any, Dict, Optional


class FactorAnalysisError(Exception):
    """Base class for all randfa errors"""

    exit_code: int = 5

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.context: Dict[str, Any] = dict(context or {})


class InvalidInputError(FactorAnalysisError, ValueError):
    """Malformed arguments: non-finite values, wrong shapes, k out of range"""

    exit_code = 2


class DomainError(FactorAnalysisError, ValueError):
    """Input is well formed but outside the model's domain"""

    exit_code = 3


class EigenvalueDeficitError(DomainError):
    """A retained eigenvalue of the rescaled covariance is not above 1"""

    def __init__(self, index: int, value: float, context: Optional[Dict[str, Any]] = None):
        message = (
            f"retained eigenvalue {index} equals {value:.6g} <= 1; "
            "k is too large for these data"
        )
        super().__init__(message, {"index": index, "eigenvalue": value, **(context or {})})
        self.index = index
        self.value = value


class RankAnomalyError(DomainError):
    """Fewer than k positive singular values in the rescaled data"""


class DegenerateFactorError(DomainError):
    """A factor has no signal (omega <= 1 or singular Lambda_z' Lambda_z)"""


class HeywoodCaseError(DomainError):
    """An update produced a zero or negative unique variance"""


class DataFormatError(FactorAnalysisError, ValueError):
    """A data file could not be parsed"""

    exit_code = 3


class ModelFileError(FactorAnalysisError):
    """A model file could not be read or written"""

    exit_code = 3


class SchemaVersionError(ModelFileError):
    """Model file written with an unsupported schema version"""


class NumericalError(FactorAnalysisError, ArithmeticError):
    """Backend numerical failure"""

    exit_code = 5
