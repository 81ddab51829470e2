"""
JSON persistence for fitted models and simulation specs
"""

import json
from pathlib import Path
from typing import Any, Dict

import structlog
from pydantic import ValidationError

from randfa.core.exceptions import (
    DomainError,
    InvalidInputError,
    ModelFileError,
    SchemaVersionError,
)
from randfa.models.fa_model import FaModel
from randfa.models.model_file import SCHEMA_VERSION, ModelFile
from randfa.models.simulation import SimSpec
from randfa.services.simulation import sim_spec_from_dict

from .base import BaseRepository, PathLike

logger = structlog.get_logger()


class ModelRepository(BaseRepository):
    """Model files: one JSON object, fields in ModelFile order"""

    error_type = ModelFileError
    kind = "model file"

    def _parse(self, path: PathLike) -> Dict[str, Any]:
        text = self.read_text(path)
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise self._fail(f"malformed or truncated JSON (line {e.lineno}, column {e.colno})", path, e) from e
        if not isinstance(payload, dict):
            raise ModelFileError(f"{path}: expected a JSON object", {"path": str(path)})
        return payload

    def save(self, model: FaModel, path: PathLike) -> Path:
        # pydantic writes floats in shortest round-trip form
        document = ModelFile.from_model(model).model_dump_json(by_alias=True, indent=2)
        return self.write_text(path, document + "\n")

    def load(self, path: PathLike) -> FaModel:
        payload = self._parse(path)
        version = payload.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaVersionError(
                f"{path}: schema_version {version!r} is not supported (expected {SCHEMA_VERSION})",
                {"path": str(path), "schema_version": version},
            )
        try:
            model = ModelFile.model_validate(payload).to_model()
        except ValidationError as e:
            first = e.errors()[0]
            location = ".".join(str(part) for part in first["loc"])
            raise self._fail(f"invalid field {location}: {first['msg']}", path, e) from e
        except (InvalidInputError, DomainError) as e:
            raise self._fail(f"inconsistent model: {e}", path, e) from e
        logger.info("Model loaded", path=str(path), p=model.p, k=model.k, converged=model.converged)
        return model


class SimSpecRepository(BaseRepository):
    """Simulation specs as JSON objects mirroring SimSpec"""

    error_type = InvalidInputError
    kind = "simulation spec"

    def load(self, path: PathLike) -> SimSpec:
        text = self.read_text(path)
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise self._fail(f"malformed JSON (line {e.lineno}, column {e.colno})", path, e) from e
        if not isinstance(payload, dict):
            raise InvalidInputError(f"{path}: expected a JSON object", {"path": str(path)})
        return sim_spec_from_dict(payload)


model_repository = ModelRepository()
sim_spec_repository = SimSpecRepository()


def save_model(model: FaModel, path: PathLike) -> Path:
    return model_repository.save(model, path)


def load_model(path: PathLike) -> FaModel:
    return model_repository.load(path)


def load_sim_spec(path: PathLike) -> SimSpec:
    return sim_spec_repository.load(path)
