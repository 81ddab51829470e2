"""
Base repository with shared file access
"""

from pathlib import Path
from typing import Any, Dict, Type, Union

import structlog

from randfa.core.exceptions import FactorAnalysisError

logger = structlog.get_logger()

PathLike = Union[str, Path]


class BaseRepository:
    """File access that reports failures as domain errors with the path attached"""

    error_type: Type[FactorAnalysisError] = FactorAnalysisError
    kind: str = "file"

    def _fail(self, message: str, path: PathLike, cause: Exception, **context: Any) -> FactorAnalysisError:
        details: Dict[str, Any] = {"path": str(path), **context}
        logger.error(f"Error handling {self.kind}", error=str(cause), **details)
        return self.error_type(f"{path}: {message}", details)

    def read_text(self, path: PathLike) -> str:
        """Read a UTF-8 file"""
        try:
            return Path(path).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise self._fail(f"cannot read {self.kind}: {e}", path, e) from e

    def write_text(self, path: PathLike, text: str) -> Path:
        """Write a UTF-8 file, creating parent directories"""
        target = Path(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8")
        except OSError as e:
            raise self._fail(f"cannot write {self.kind}: {e}", path, e) from e
        logger.info(f"{self.kind.capitalize()} written", path=str(target))
        return target
