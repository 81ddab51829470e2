"""
Configuration management using Pydantic settings
"""

from typing import Literal, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Library and CLI settings loaded from FA_* environment variables"""

    model_config = SettingsConfigDict(
        env_prefix="FA_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Application Configuration
    APP_NAME: str = Field(default="randfa")
    APP_VERSION: str = Field(default="0.1.0")
    DEBUG: bool = Field(default=False)
    ENVIRONMENT: str = Field(default="development")

    # Logging Configuration
    LOG_LEVEL: str = Field(default="INFO")
    LOG_FORMAT: Literal["json", "console"] = Field(default="console")
    LOG_FILE: Optional[str] = Field(default=None)

    # Linear algebra backend
    SVD_THREADS: Optional[int] = Field(default=None)

    # Estimator defaults
    DEFAULT_MAX_ITER: int = Field(default=500)
    DEFAULT_TOL_PSI: float = Field(default=1e-8)
    DEFAULT_TOL_TRACE: float = Field(default=1e-6)
    DEFAULT_PSI_INIT_FRACTION: float = Field(default=0.5)
    NEAR_BOUNDARY_EIGENVALUE: float = Field(default=1e-12)

    # Output Configuration
    PLOT_FORMAT: Literal["svg", "pdf"] = Field(default="svg")
    METRICS_ENABLED: bool = Field(default=True)

    @field_validator("LOG_LEVEL")
    @classmethod
    def normalize_log_level(cls, v: str) -> str:
        """Accept lower-case level names"""
        return v.upper()

    @field_validator("SVD_THREADS")
    @classmethod
    def validate_svd_threads(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError("SVD_THREADS must be a positive integer")
        return v


# Create global settings instance
settings = Settings()


def validate_settings() -> None:
    """Validate estimator defaults on startup"""
    if settings.DEFAULT_MAX_ITER < 1:
        raise ValueError("DEFAULT_MAX_ITER must be at least 1")
    if settings.DEFAULT_TOL_PSI <= 0 or settings.DEFAULT_TOL_TRACE <= 0:
        raise ValueError("convergence tolerances must be strictly positive")
    if not 0 < settings.DEFAULT_PSI_INIT_FRACTION < 1:
        raise ValueError("DEFAULT_PSI_INIT_FRACTION must lie in (0, 1)")


# Validate settings on import
try:
    validate_settings()
except ValueError as e:
    import warnings
    warnings.warn(f"Settings validation warning: {e}", UserWarning)
