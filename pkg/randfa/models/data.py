"""
Observation matrix with column metadata
"""

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from randfa.core.exceptions import DomainError, InvalidInputError


def _frozen(array: NDArray[np.float64]) -> NDArray[np.float64]:
    array = np.ascontiguousarray(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DataMatrix:
    """n x p observations (rows) of p variables (columns).

    ``column_means`` holds the means removed by centering and
    ``column_scales`` the standard deviations divided out by standardization
    (ones when the data were only centered).
    """

    values: NDArray[np.float64]
    column_names: Tuple[str, ...]
    centered: bool
    column_scales: NDArray[np.float64]
    column_means: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidInputError(f"data must be a 2-d matrix, got {values.ndim} dimensions")
        n, p = values.shape
        if n < 2 or p < 1:
            raise InvalidInputError(f"need n >= 2 observations and p >= 1 variables, got n={n}, p={p}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("data contain non-finite values")
        if len(self.column_names) != p:
            raise InvalidInputError(f"{len(self.column_names)} column names for {p} columns")

        scales = np.asarray(self.column_scales, dtype=np.float64)
        if scales.shape != (p,):
            raise InvalidInputError(f"column_scales must have length {p}")
        if not np.all(scales > 0):
            raise DomainError("column_scales must be strictly positive")

        means = np.zeros(p) if self.column_means is None else np.asarray(self.column_means, dtype=np.float64)
        if means.shape != (p,):
            raise InvalidInputError(f"column_means must have length {p}")

        if self.centered:
            drift = np.abs(values.mean(axis=0))
            bound = 1e-12 * (values.std(axis=0, ddof=1) + 1.0)
            if np.any(drift > bound):
                worst = int(np.argmax(drift - bound))
                raise InvalidInputError(
                    f"column {self.column_names[worst]!r} is flagged centered but has mean {drift[worst]:.3g}"
                )

        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "column_scales", _frozen(scales))
        object.__setattr__(self, "column_means", _frozen(means))
        object.__setattr__(self, "column_names", tuple(str(name) for name in self.column_names))

    @classmethod
    def from_array(
        cls,
        values: ArrayLike,
        column_names: Optional[Sequence[str]] = None,
        *,
        standardize: bool = False,
        column_means: Optional[ArrayLike] = None,
        column_scales: Optional[ArrayLike] = None,
    ) -> "DataMatrix":
        """Center (and optionally standardize) a raw matrix.

        Passing ``column_means``/``column_scales`` applies an existing
        preprocessing instead of estimating one, e.g. to score new data with
        the training transformation.
        """
        raw = np.asarray(values, dtype=np.float64)
        if raw.ndim != 2:
            raise InvalidInputError(f"data must be a 2-d matrix, got {raw.ndim} dimensions")
        n, p = raw.shape
        names = tuple(column_names) if column_names is not None else tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise InvalidInputError(f"{len(names)} column names for {p} columns")
        if not np.all(np.isfinite(raw)):
            raise InvalidInputError("data contain non-finite values")

        if column_means is None:
            means = raw.mean(axis=0)
        else:
            means = np.asarray(column_means, dtype=np.float64)
            if means.shape != (p,):
                raise InvalidInputError(f"column_means must have length {p}, got {means.shape}")
        centered_values = raw - means

        if column_scales is not None:
            scales = np.asarray(column_scales, dtype=np.float64)
            if scales.shape != (p,):
                raise InvalidInputError(f"column_scales must have length {p}, got {scales.shape}")
        elif standardize:
            if n < 2:
                raise InvalidInputError("standardization needs at least two observations")
            scales = centered_values.std(axis=0, ddof=1)
            constant = np.flatnonzero(scales <= 0)
            if constant.size:
                raise DomainError(
                    f"column {names[constant[0]]!r} is constant and cannot be standardized",
                    {"column": names[constant[0]], "column_index": int(constant[0])},
                )
        else:
            scales = np.ones(p)

        scaled = centered_values / scales
        residue = scaled.mean(axis=0)
        centered = bool(np.all(np.abs(residue) <= 1e-8 * (scaled.std(axis=0, ddof=1) + 1.0)))
        if centered:
            # rounding residue of the subtraction; same arithmetic in both modes
            scaled = scaled - residue

        return cls(
            values=scaled,
            column_names=names,
            centered=centered,
            column_scales=scales,
            column_means=means,
        )

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def p(self) -> int:
        return int(self.values.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n, self.p

    def sample_variances(self) -> NDArray[np.float64]:
        """diag(S_xx) with the n-1 denominator"""
        return np.einsum("ij,ij->j", self.values, self.values) / (self.n - 1)

    def fingerprint(self) -> str:
        """SHA-256 of the stored matrix, used to recognise the training sample"""
        digest = hashlib.sha256()
        digest.update(np.asarray(self.shape, dtype=np.int64).tobytes())
        digest.update(self.values.tobytes())
        return digest.hexdigest()

    def select_columns(self, indices: Sequence[int]) -> "DataMatrix":
        idx = np.asarray(indices, dtype=int)
        return DataMatrix(
            values=self.values[:, idx],
            column_names=tuple(self.column_names[i] for i in idx),
            centered=self.centered,
            column_scales=self.column_scales[idx],
            column_means=self.column_means[idx],
        )

    def scale_columns(self, factors: ArrayLike) -> "DataMatrix":
        """X . D for a positive diagonal D"""
        d = np.asarray(factors, dtype=np.float64)
        if d.shape != (self.p,) or not np.all(d > 0):
            raise InvalidInputError("scale factors must be a positive vector of length p")
        return DataMatrix(
            values=self.values * d,
            column_names=self.column_names,
            centered=self.centered,
            column_scales=self.column_scales / d,
            column_means=self.column_means,
        )
