"""
Fit configuration
"""

import enum
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from randfa.core.config import settings
from randfa.core.exceptions import InvalidInputError


class UpdateRule(str, enum.Enum):
    """Uniqueness update used inside the fixed-point iteration"""
    SUBTRACT = "subtract"
    RESCALE = "rescale"


class FaConfig(BaseModel):
    """Factor count, update rule, starting values and stopping rule"""

    model_config = ConfigDict(frozen=True, use_enum_values=False)

    k: int = Field(ge=1)
    rule: UpdateRule = UpdateRule.SUBTRACT
    # None -> DEFAULT_PSI_INIT_FRACTION * diag(S_xx); scalar c -> c * diag(S_xx);
    # sequence -> literal starting values
    psi2_init: Optional[Union[float, List[float]]] = None
    max_iter: int = Field(default_factory=lambda: settings.DEFAULT_MAX_ITER, ge=1)
    tol_psi: float = Field(default_factory=lambda: settings.DEFAULT_TOL_PSI, gt=0)
    tol_trace: float = Field(default_factory=lambda: settings.DEFAULT_TOL_TRACE, gt=0)
    seed: Optional[int] = None

    @field_validator("psi2_init")
    @classmethod
    def validate_psi2_init(cls, v: Optional[Union[float, List[float]]]) -> Optional[Union[float, List[float]]]:
        if v is None:
            return v
        if isinstance(v, list):
            if not v:
                raise ValueError("psi2_init must not be empty")
            if any(not (value > 0) for value in v):
                raise ValueError("psi2_init entries must be strictly positive")
            return [float(value) for value in v]
        if not (v > 0):
            raise ValueError("psi2_init must be strictly positive")
        return float(v)

    def check_dimensions(self, n: int, p: int) -> None:
        """Enforce k < min(n, p) and a matching starting vector"""
        if self.k >= min(n, p):
            raise InvalidInputError(
                f"k={self.k} must be smaller than min(n, p) = {min(n, p)}",
                {"k": self.k, "n": n, "p": p},
            )
        if isinstance(self.psi2_init, list) and len(self.psi2_init) != p:
            raise InvalidInputError(
                f"psi2_init has {len(self.psi2_init)} entries for p={p} variables"
            )
