"""Dense linear-algebra kernels.

Matrices are plain float64 ``numpy`` arrays in row-major order; symmetric
matrices are stored in full with exact ``A[i, j] == A[j, i]`` maintained by
construction.  Factorizations are delegated to LAPACK (via numpy/scipy) and
wrapped with the tolerance and error semantics this package requires.

No inverse is ever materialized: every quadratic form and determinant goes
through a Cholesky factor.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionMismatch,
    NotPositiveDefinite,
    RankDeficient,
    TooFewSamples,
)

# A Cholesky pivot at or below PIVOT_RTOL * max(diag) is treated as rank
# deficiency rather than roundoff, so fits on degenerate projected
# covariances fail loudly instead of producing garbage solves.
PIVOT_RTOL = 1e-12

QR_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular Cholesky factor together with the log-determinant
    of the factored matrix (``log_det = 2 * sum(log(diag(lower)))``)."""

    lower: np.ndarray
    log_det: float

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


def cholesky(s: np.ndarray) -> CholeskyFactor:
    """Factor a symmetric positive-definite matrix as ``L @ L.T``.

    Parameters
    ----------
    s : ndarray, shape (dim, dim)
        Symmetric matrix; only finite entries are meaningful.

    Returns
    -------
    CholeskyFactor

    Raises
    ------
    NotPositiveDefinite
        If LAPACK reports a non-positive pivot, or any pivot (squared
        diagonal of L) is at or below ``PIVOT_RTOL * max(diag(s))``.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {s.shape}")
    try:
        lower = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    diag = np.diagonal(lower)
    tol = PIVOT_RTOL * max(float(np.max(np.diagonal(s))), 0.0)
    if not np.all(diag * diag > tol):
        raise NotPositiveDefinite(
            f"pivot {float(np.min(diag * diag)):.3e} at or below tolerance {tol:.3e}")
    log_det = 2.0 * float(np.sum(np.log(diag)))
    return CholeskyFactor(lower=lower, log_det=log_det)


def solve_quadratic_form(factor: CholeskyFactor, v: np.ndarray) -> float:
    """Return ``v.T @ S^{-1} @ v`` for the matrix factored in ``factor``.

    Computed as ``||L^{-1} v||^2`` via one triangular solve, hence always
    nonnegative.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (factor.dim,):
        raise DimensionMismatch(
            f"vector of length {v.shape} against factor of dim {factor.dim}")
    y = solve_triangular(factor.lower, v, lower=True, check_finite=False)
    return float(y @ y)


def solve_quadratic_form_rows(factor: CholeskyFactor, rows: np.ndarray) -> np.ndarray:
    """Vectorized ``solve_quadratic_form`` over the rows of an (m, dim) array."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != factor.dim:
        raise DimensionMismatch(
            f"rows of shape {rows.shape} against factor of dim {factor.dim}")
    y = solve_triangular(factor.lower, rows.T, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", y, y)


def qr_orthogonal(a: np.ndarray) -> np.ndarray:
    """Orthogonal factor of a square full-rank matrix.

    Uses the sign convention that makes the upper-triangular factor have a
    strictly positive diagonal, which pins down Q uniquely.

    Raises
    ------
    RankDeficient
        If any diagonal of R falls below ``QR_RANK_RTOL * ||a||_F``.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {a.shape}")
    q, r = np.linalg.qr(a)
    rdiag = np.diagonal(r)
    if np.any(np.abs(rdiag) < QR_RANK_RTOL * np.linalg.norm(a)):
        raise RankDeficient("matrix is numerically rank deficient")
    return q * np.sign(rdiag)


def orthonormal_columns(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis for the column span of a tall full-rank matrix,
    with the same positive-diagonal sign convention as ``qr_orthogonal``."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape[1] == 0:
        return a.copy()
    if a.shape[0] < a.shape[1]:
        raise DimensionMismatch(f"expected rows >= cols, got {a.shape}")
    q, r = np.linalg.qr(a, mode="reduced")
    rdiag = np.diagonal(r)
    if np.any(np.abs(rdiag) < QR_RANK_RTOL * np.linalg.norm(a)):
        raise RankDeficient("matrix is numerically rank deficient")
    return q * np.sign(rdiag)


def sample_covariance(x: np.ndarray, mean: np.ndarray) -> np.ndarray:
    """Sample covariance with the n - 1 denominator around a given mean.

    Symmetric by construction (the cross-product is symmetrized to remove
    floating-point asymmetry).
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {n}")
    centered = x - np.asarray(mean, dtype=np.float64)
    cov = centered.T @ centered / (n - 1)
    return (cov + cov.T) / 2.0
