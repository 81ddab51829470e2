"""
Fitted factor model, iteration trace and the canonical form of the loadings
"""

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from randfa.core.exceptions import DomainError, InvalidInputError
from randfa.models.fa_config import FaConfig

# off-diagonal mass of Lambda_z' Lambda_z below which no rotation is applied
_DIAGONAL_TOL = 1e-12

TRACE_COLUMNS = (
    "iter",
    "tail_sum_over_nminus1",
    "min_psi2",
    "max_psi2",
    "psi2_rel_change",
    "omega_min",
)


def _readonly(array: ArrayLike) -> NDArray[np.float64]:
    out = np.array(array, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


def _validate_pair(lam: ArrayLike, psi2: ArrayLike) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    lam = np.asarray(lam, dtype=np.float64)
    psi2 = np.asarray(psi2, dtype=np.float64)
    if lam.ndim != 2:
        raise InvalidInputError(f"loadings must be a p x k matrix, got shape {lam.shape}")
    if psi2.shape != (lam.shape[0],):
        raise InvalidInputError(f"psi2 must have length {lam.shape[0]}, got shape {psi2.shape}")
    if not np.all(np.isfinite(lam)) or not np.all(np.isfinite(psi2)):
        raise InvalidInputError("loadings and uniquenesses must be finite")
    if not np.all(psi2 > 0):
        bad = int(np.flatnonzero(psi2 <= 0)[0])
        raise DomainError(f"psi2[{bad}] = {psi2[bad]:.6g} is not strictly positive", {"index": bad})
    return lam, psi2


def canonicalize(lam: ArrayLike, psi2: ArrayLike) -> NDArray[np.float64]:
    """Resolve the rotation, order and sign ambiguity of the loadings.

    The returned matrix has ``L' Psi^-2 L`` diagonal with decreasing
    diagonal. Each column of ``Psi^-1 L`` has its largest-magnitude entry
    positive (lowest row index on ties). Applying it twice changes nothing.
    """
    lam, psi2 = _validate_pair(lam, psi2)
    k = lam.shape[1]
    if k == 0:
        return lam.copy()

    psi = np.sqrt(psi2)
    lam_z = lam / psi[:, None]
    gram = lam_z.T @ lam_z
    diag = np.diag(gram).copy()
    off = gram - np.diag(diag)
    scale = max(float(np.linalg.norm(diag)), np.finfo(float).tiny)

    rotated = bool(np.linalg.norm(off) > _DIAGONAL_TOL * scale)
    if rotated:
        _, vectors = np.linalg.eigh(gram)
        lam_z = lam_z @ vectors
        diag = np.einsum("ij,ij->j", lam_z, lam_z)

    # stable sort keeps the original column order on ties
    order = np.argsort(-diag, kind="stable")
    lam_z = lam_z[:, order]

    pivots = np.argmax(np.abs(lam_z), axis=0)
    signs = np.where(lam_z[pivots, np.arange(k)] < 0, -1.0, 1.0)

    if rotated:
        return (lam_z * signs) * psi[:, None]
    # permutation and sign flips act on Lambda directly, so a canonical input is returned bit for bit
    return lam[:, order] * signs


@dataclass(frozen=True)
class IterationRecord:
    """State after one fixed-point step"""

    iter_index: int
    tail_sum: float
    min_psi2: float
    max_psi2: float
    psi2_rel_change: float
    omega_min: float

    def as_row(self) -> Tuple[float, ...]:
        return (
            self.iter_index,
            self.tail_sum,
            self.min_psi2,
            self.max_psi2,
            self.psi2_rel_change,
            self.omega_min,
        )


@dataclass(frozen=True)
class IterationTrace:
    """Ordered per-iteration records of one fit"""

    records: Tuple[IterationRecord, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        for record in self.records:
            if record.tail_sum < 0:
                raise InvalidInputError(
                    f"negative tail sum {record.tail_sum} at iteration {record.iter_index}"
                )

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[IterationRecord]:
        return iter(self.records)

    def __getitem__(self, index: int) -> IterationRecord:
        return self.records[index]

    def appended(self, record: IterationRecord) -> "IterationTrace":
        return IterationTrace(self.records + (record,))

    @property
    def last(self) -> Optional[IterationRecord]:
        return self.records[-1] if self.records else None

    def column(self, name: str) -> NDArray[np.float64]:
        attribute = {"iter": "iter_index", "tail_sum_over_nminus1": "tail_sum"}.get(name, name)
        return np.array([getattr(record, attribute) for record in self.records], dtype=np.float64)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([record.as_row() for record in self.records], columns=list(TRACE_COLUMNS))
        return frame.astype({"iter": "int64"})


@dataclass(frozen=True)
class FaModel:
    """Fitted loadings and uniquenesses with their fit record"""

    lam: NDArray[np.float64]
    psi2: NDArray[np.float64]
    omega: NDArray[np.float64]
    n_used: int
    converged: bool
    trace: IterationTrace
    config: Optional[FaConfig] = None
    column_names: Tuple[str, ...] = ()
    column_scales: Optional[NDArray[np.float64]] = None
    column_means: Optional[NDArray[np.float64]] = None
    data_fingerprint: Optional[str] = None
    warnings: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        lam, psi2 = _validate_pair(self.lam, self.psi2)
        p, k = lam.shape
        omega = np.asarray(self.omega, dtype=np.float64)
        if omega.shape != (k,):
            raise InvalidInputError(f"omega must have length k={k}, got shape {omega.shape}")
        if self.n_used < 2:
            raise InvalidInputError("n_used must be at least 2")
        names = tuple(self.column_names) or tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise InvalidInputError(f"{len(names)} column names for p={p}")
        scales = np.ones(p) if self.column_scales is None else self.column_scales
        means = np.zeros(p) if self.column_means is None else self.column_means

        object.__setattr__(self, "lam", _readonly(lam))
        object.__setattr__(self, "psi2", _readonly(psi2))
        object.__setattr__(self, "omega", _readonly(omega))
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "column_scales", _readonly(scales))
        object.__setattr__(self, "column_means", _readonly(means))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @property
    def p(self) -> int:
        return int(self.lam.shape[0])

    @property
    def k(self) -> int:
        return int(self.lam.shape[1])

    @property
    def lambda_z(self) -> NDArray[np.float64]:
        """Rescaled loadings Psi^-1 Lambda"""
        return self.lam / np.sqrt(self.psi2)[:, None]

    @property
    def communalities(self) -> NDArray[np.float64]:
        return np.einsum("ij,ij->i", self.lam, self.lam)

    @property
    def sigma_diag(self) -> NDArray[np.float64]:
        """diag(Lambda Lambda' + Psi^2)"""
        return self.communalities + self.psi2

    @property
    def uniqueness_ratio(self) -> NDArray[np.float64]:
        """psi2_j / sigma_jj"""
        return self.psi2 / self.sigma_diag

    def constraint_gap(self) -> float:
        """Relative off-diagonal norm of Lambda' Psi^-2 Lambda"""
        gram = self.lambda_z.T @ self.lambda_z
        diag = np.diag(gram)
        scale = max(float(np.linalg.norm(diag)), np.finfo(float).tiny)
        return float(np.linalg.norm(gram - np.diag(diag)) / scale)

    def with_updates(self, **changes: object) -> "FaModel":
        from dataclasses import replace
        return replace(self, **changes)

    @classmethod
    def from_parameters(
        cls,
        lam: ArrayLike,
        psi2: ArrayLike,
        n_used: int,
        *,
        converged: bool = True,
        column_names: Sequence[str] = (),
    ) -> "FaModel":
        """Build a canonical model from given (Lambda, Psi^2), e.g. a known truth"""
        canonical = canonicalize(lam, psi2)
        psi2_arr = np.asarray(psi2, dtype=np.float64)
        lam_z = canonical / np.sqrt(psi2_arr)[:, None]
        omega = np.einsum("ij,ij->j", lam_z, lam_z) + 1.0
        return cls(
            lam=canonical,
            psi2=psi2_arr,
            omega=omega,
            n_used=n_used,
            converged=converged,
            trace=IterationTrace(),
            column_names=tuple(column_names),
        )
