"""
Logging configuration using structlog
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import structlog
from structlog.stdlib import LoggerFactory

from randfa.core.config import settings


def _renderer():
    if settings.LOG_FORMAT == "json":
        return structlog.processors.JSONRenderer()
    return structlog.dev.ConsoleRenderer(colors=False)


def setup_logging(level: Optional[str] = None) -> None:
    """Route structured logs to standard error and, optionally, FA_LOG_FILE.

    Standard output stays free: every result of a command goes to a file.
    """
    log_level = getattr(logging, (level or settings.LOG_LEVEL).upper())

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            _renderer(),
        ],
        context_class=dict,
        logger_factory=LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=log_level, force=True)

    if settings.LOG_FILE:
        log_file = Path(settings.LOG_FILE)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(log_level)
        logging.getLogger().addHandler(file_handler)

    # Font discovery and backend chatter
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("PIL").setLevel(logging.WARNING)


def log_error(error: Exception, context: Optional[Dict[str, Any]] = None) -> None:
    """Log a failed command with the error's own context fields"""
    logger = structlog.get_logger("randfa.error")
    error_data: Dict[str, Any] = {
        "error_type": type(error).__name__,
        "error_message": str(error),
        "exit_code": getattr(error, "exit_code", None),
    }
    error_data.update(getattr(error, "context", None) or {})
    error_data.update(context or {})
    logger.error("Command failed", **error_data)


def log_performance(command: str, duration: float, **kwargs: Any) -> None:
    """Log the wall time of a finished command"""
    structlog.get_logger("randfa.performance").info(
        "Command finished",
        command=command,
        duration=round(duration, 6),
        **kwargs
    )
