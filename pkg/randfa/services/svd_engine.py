"""
Rescaled data Z = X Psi^-1 and its truncated singular value decomposition.

Only the leading k singular triplets are kept. The trailing part enters
every formula through tr(D_2^2) = ||Z||_F^2 - tr(D_1^2), so U_2, D_2 and
V_2 are never formed.
"""

import enum
import time
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg
import structlog
from numpy.typing import ArrayLike, NDArray

from randfa.core.exceptions import DomainError, InvalidInputError, NumericalError
from randfa.core.metrics import SVD_DURATION, metrics_enabled
from randfa.models.data import DataMatrix

logger = structlog.get_logger(__name__)


class SvdMethod(str, enum.Enum):
    """How the leading singular triplets are computed"""
    AUTO = "auto"
    GRAM = "gram"              # eigendecomposition of Z Z' (n x n)
    COVARIANCE = "covariance"  # eigendecomposition of Z' Z (p x p)
    DIRECT = "direct"          # LAPACK thin SVD


@dataclass(frozen=True)
class TruncatedSvd:
    """Leading k singular triplets of Z plus the tail mass tr(D_2^2)"""

    u1: NDArray[np.float64]
    d1: NDArray[np.float64]
    v1: NDArray[np.float64]
    tail_sum_sq: float
    rank_bound: int

    @property
    def k(self) -> int:
        return int(self.d1.shape[0])

    @property
    def n(self) -> int:
        return int(self.u1.shape[0])

    @property
    def p(self) -> int:
        return int(self.v1.shape[0])

    def omega(self, n: int) -> NDArray[np.float64]:
        """Retained eigenvalues D_1^2/(n-1) of S_zz"""
        return self.d1 ** 2 / (n - 1)

    def reconstruction(self) -> NDArray[np.float64]:
        """U_1 D_1 V_1'"""
        return (self.u1 * self.d1) @ self.v1.T

    def positive_count(self, rtol: Optional[float] = None) -> int:
        """Number of retained singular values distinguishable from zero"""
        if self.d1.size == 0 or self.d1[0] <= 0:
            return 0
        tol = (rtol if rtol is not None else np.finfo(float).eps * max(self.n, self.p)) * self.d1[0]
        return int(np.count_nonzero(self.d1 > tol))


def rescale_columns(values: ArrayLike, psi2: ArrayLike) -> NDArray[np.float64]:
    """Divide column j by sqrt(psi2[j])"""
    values = np.asarray(values, dtype=np.float64)
    psi2 = np.asarray(psi2, dtype=np.float64)
    if values.ndim != 2 or psi2.shape != (values.shape[1],):
        raise InvalidInputError(
            f"psi2 of shape {psi2.shape} does not match data of shape {values.shape}"
        )
    if not np.all(psi2 > 0):
        bad = int(np.flatnonzero(~(psi2 > 0))[0])
        raise DomainError(f"psi2[{bad}] = {psi2[bad]:.6g} is not strictly positive", {"index": bad})
    return values / np.sqrt(psi2)


def scaled_data(x: Union[DataMatrix, ArrayLike], psi2: ArrayLike) -> NDArray[np.float64]:
    """Z = X Psi^-1 for centered data"""
    if isinstance(x, DataMatrix):
        if not x.centered:
            raise InvalidInputError("data must be column-centered before rescaling")
        values = x.values
    else:
        values = np.asarray(x, dtype=np.float64)
    return rescale_columns(values, psi2)


def _complete_orthonormal(basis: NDArray[np.float64], dim: int, count: int) -> NDArray[np.float64]:
    """``count`` orthonormal vectors of R^dim orthogonal to ``basis``"""
    candidates = np.eye(dim)
    if basis.shape[1]:
        candidates = candidates - basis @ (basis.T @ candidates)
    q, _, _ = scipy.linalg.qr(candidates, pivoting=True)
    return q[:, :count]


def _other_side(
    z: NDArray[np.float64],
    vectors: NDArray[np.float64],
    d: NDArray[np.float64],
    dim: int,
) -> NDArray[np.float64]:
    """Map singular vectors to the other side, completing zero directions"""
    tol = np.finfo(float).eps * max(z.shape) * (d[0] if d.size else 0.0)
    good = d > tol
    out = np.empty((dim, d.size))
    out[:, good] = (z @ vectors[:, good]) / d[good]
    if not np.all(good):
        out[:, ~good] = _complete_orthonormal(out[:, good], dim, int(np.count_nonzero(~good)))
    return out


def _leading_eigenpairs(matrix: NDArray[np.float64], k: int, size: int):
    try:
        values, vectors = scipy.linalg.eigh(matrix)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"eigensolver failed: {e}") from e
    order = np.argsort(-values, kind="stable")[:k]
    top = values[order]
    # eigenvalues at rounding level of the largest one are zero singular values
    cutoff = 10 * np.finfo(float).eps * size * max(float(values[-1]), 0.0)
    top = np.where(top > cutoff, top, 0.0)
    return np.sqrt(top), vectors[:, order]


def _fix_signs(u1: NDArray[np.float64], v1: NDArray[np.float64]):
    """Largest-magnitude entry of each v1 column positive"""
    if v1.shape[1] == 0:
        return u1, v1
    pivots = np.argmax(np.abs(v1), axis=0)
    signs = np.where(v1[pivots, np.arange(v1.shape[1])] < 0, -1.0, 1.0)
    return u1 * signs, v1 * signs


def truncated_svd(z: ArrayLike, k: int, method: Union[SvdMethod, str] = SvdMethod.AUTO) -> TruncatedSvd:
    """Best rank-k approximation of z and the mass it leaves out"""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise InvalidInputError(f"expected a matrix, got shape {z.shape}")
    n, p = z.shape
    if not 1 <= k < min(n, p):
        raise InvalidInputError(f"k={k} must satisfy 1 <= k < min(n, p) = {min(n, p)}", {"k": k, "n": n, "p": p})
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("matrix contains non-finite values")

    method = SvdMethod(method)
    if method is SvdMethod.AUTO:
        method = SvdMethod.GRAM if p > n else SvdMethod.DIRECT

    start = time.perf_counter()
    if method is SvdMethod.GRAM:
        d1, u1 = _leading_eigenpairs(z @ z.T, k, max(n, p))
        v1 = _other_side(z.T, u1, d1, p)
    elif method is SvdMethod.COVARIANCE:
        d1, v1 = _leading_eigenpairs(z.T @ z, k, max(n, p))
        u1 = _other_side(z, v1, d1, n)
    else:
        try:
            u, s, vt = scipy.linalg.svd(z, full_matrices=False, lapack_driver="gesdd")
        except np.linalg.LinAlgError:
            logger.warning("gesdd did not converge, retrying with gesvd", n=n, p=p)
            try:
                u, s, vt = scipy.linalg.svd(z, full_matrices=False, lapack_driver="gesvd")
            except np.linalg.LinAlgError as e:
                raise NumericalError(f"SVD did not converge: {e}", {"n": n, "p": p}) from e
        u1, d1, v1 = u[:, :k], s[:k], vt[:k].T

    u1, v1 = _fix_signs(u1, v1)
    total = float(np.einsum("ij,ij->", z, z))
    tail = max(total - float(np.sum(d1 ** 2)), 0.0)

    duration = time.perf_counter() - start
    if metrics_enabled():
        SVD_DURATION.labels(method=method.value).observe(duration)
    logger.debug("Truncated SVD", method=method.value, n=n, p=p, k=k, duration=duration)

    return TruncatedSvd(
        u1=np.ascontiguousarray(u1),
        d1=np.ascontiguousarray(d1),
        v1=np.ascontiguousarray(v1),
        tail_sum_sq=tail,
        rank_bound=min(n - 1, p),
    )
