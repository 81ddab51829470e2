"""
Simulation specification for synthetic factor-model data
"""

import enum
import re
from typing import Any, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class DistributionKind(str, enum.Enum):
    """Standardized (mean 0, variance 1) draw families"""
    GAUSSIAN = "gaussian"
    UNIFORM_SCALED = "uniform_scaled"
    STUDENT_T = "student_t"


_STUDENT_T_PATTERN = re.compile(r"^\s*student_t\s*\(\s*([0-9.eE+-]+)\s*\)\s*$")


class DistributionSpec(BaseModel):
    """Draw family; ``df`` only for student_t, which needs df >= 3"""

    model_config = ConfigDict(frozen=True)

    kind: DistributionKind = DistributionKind.GAUSSIAN
    df: Optional[float] = None

    @model_validator(mode="before")
    @classmethod
    def parse_shorthand(cls, data: Any) -> Any:
        """Accept "gaussian", "uniform_scaled" and "student_t(5)" strings"""
        if isinstance(data, DistributionKind):
            return {"kind": data}
        if isinstance(data, str):
            match = _STUDENT_T_PATTERN.match(data)
            if match:
                return {"kind": DistributionKind.STUDENT_T, "df": float(match.group(1))}
            return {"kind": data.strip()}
        return data

    @model_validator(mode="after")
    def check_df(self) -> "DistributionSpec":
        if self.kind is DistributionKind.STUDENT_T:
            if self.df is None or not self.df >= 3:
                raise ValueError("student_t needs df >= 3 so that the variance can be standardized")
        elif self.df is not None:
            raise ValueError(f"df is only meaningful for student_t, not {self.kind.value}")
        return self

    def label(self) -> str:
        if self.kind is DistributionKind.STUDENT_T:
            return f"student_t({self.df:g})"
        return self.kind.value


class SimSpec(BaseModel):
    """X = F Lambda' + E Psi with standardized factor and noise draws"""

    model_config = ConfigDict(frozen=True)

    lambda_true: List[List[float]]
    psi2_true: List[float]
    n: int = Field(ge=2)
    factor_dist: DistributionSpec = Field(default_factory=DistributionSpec)
    noise_dist: DistributionSpec = Field(default_factory=DistributionSpec)
    seed: int = 0

    @field_validator("psi2_true")
    @classmethod
    def validate_psi2(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("psi2_true must not be empty")
        if any(not (value > 0) for value in v):
            raise ValueError("psi2_true entries must be strictly positive")
        return v

    @model_validator(mode="after")
    def check_shapes(self) -> "SimSpec":
        p = len(self.psi2_true)
        if len(self.lambda_true) != p:
            raise ValueError(f"lambda_true has {len(self.lambda_true)} rows for {p} variables")
        widths = {len(row) for row in self.lambda_true}
        if len(widths) != 1:
            raise ValueError("lambda_true rows must all have the same length")
        return self

    @property
    def p(self) -> int:
        return len(self.psi2_true)

    @property
    def k(self) -> int:
        return len(self.lambda_true[0])
