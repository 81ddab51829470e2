"""
On-disk JSON schema for fitted models
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from randfa.models.fa_config import FaConfig
from randfa.models.fa_model import FaModel, IterationRecord, IterationTrace

SCHEMA_VERSION = 1


class TraceRecordSchema(BaseModel):
    iter: int
    tail_sum_over_nminus1: float
    min_psi2: float
    max_psi2: float
    psi2_rel_change: float
    omega_min: float


class ModelFile(BaseModel):
    """Field order here is the field order in the file"""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: int = SCHEMA_VERSION
    k: int
    n: int
    p: int
    lambda_: List[float] = Field(alias="lambda")
    psi2: List[float]
    omega: List[float]
    column_names: List[str]
    column_scales: List[float]
    column_means: List[float]
    config: Optional[FaConfig] = None
    trace: List[TraceRecordSchema]
    converged: bool
    data_fingerprint: Optional[str] = None
    warnings: List[str] = []

    @model_validator(mode="after")
    def check_lengths(self) -> "ModelFile":
        if len(self.lambda_) != self.p * self.k:
            raise ValueError(f"lambda has {len(self.lambda_)} entries, expected p*k = {self.p * self.k}")
        for name in ("psi2", "column_scales", "column_means"):
            if len(getattr(self, name)) != self.p:
                raise ValueError(f"{name} must have p = {self.p} entries")
        if len(self.column_names) != self.p:
            raise ValueError(f"column_names must have p = {self.p} entries")
        if len(self.omega) != self.k:
            raise ValueError(f"omega must have k = {self.k} entries")
        return self

    @classmethod
    def from_model(cls, model: FaModel) -> "ModelFile":
        return cls(
            k=model.k,
            n=model.n_used,
            p=model.p,
            lambda_=model.lam.ravel(order="C").tolist(),
            psi2=model.psi2.tolist(),
            omega=model.omega.tolist(),
            column_names=list(model.column_names),
            column_scales=model.column_scales.tolist(),
            column_means=model.column_means.tolist(),
            config=model.config,
            trace=[
                TraceRecordSchema(
                    iter=record.iter_index,
                    tail_sum_over_nminus1=record.tail_sum,
                    min_psi2=record.min_psi2,
                    max_psi2=record.max_psi2,
                    psi2_rel_change=record.psi2_rel_change,
                    omega_min=record.omega_min,
                )
                for record in model.trace
            ],
            converged=model.converged,
            data_fingerprint=model.data_fingerprint,
            warnings=list(model.warnings),
        )

    def to_model(self) -> FaModel:
        trace = IterationTrace(
            tuple(
                IterationRecord(
                    iter_index=row.iter,
                    tail_sum=row.tail_sum_over_nminus1,
                    min_psi2=row.min_psi2,
                    max_psi2=row.max_psi2,
                    psi2_rel_change=row.psi2_rel_change,
                    omega_min=row.omega_min,
                )
                for row in self.trace
            )
        )
        return FaModel(
            lam=np.asarray(self.lambda_, dtype=np.float64).reshape(self.p, self.k),
            psi2=np.asarray(self.psi2, dtype=np.float64),
            omega=np.asarray(self.omega, dtype=np.float64),
            n_used=self.n,
            converged=self.converged,
            trace=trace,
            config=self.config,
            column_names=tuple(self.column_names),
            column_scales=np.asarray(self.column_scales, dtype=np.float64),
            column_means=np.asarray(self.column_means, dtype=np.float64),
            data_fingerprint=self.data_fingerprint,
            warnings=tuple(self.warnings),
        )
