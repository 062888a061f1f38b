"""Structured covariance representations.

Each class represents a symmetric positive-definite p x p matrix through
closed forms, supporting exactly the operations the samplers, the
divergence oracle and the population-mode classifier need:

* ``matvec(V)``    -- Sigma @ V for V of shape (p,) or (p, k)
* ``solve(V)``     -- Sigma^{-1} @ V, exact (no iterative methods)
* ``log_det()``    -- exact log-determinant
* ``trace()``      -- exact trace
* ``sample(n, g)`` -- n rows drawn from N(0, Sigma) using the structure
                      (cost O(p) to O(p * width) per row)
* ``dense()``      -- explicit materialization, intended for p <= 2048

Sampling consumes the supplied Generator in a fixed documented order, so a
seed fully determines the draw.
"""

import math

import numpy as np
from scipy.linalg import cho_solve
from scipy.signal import lfilter

from . import linalg

# Generic trace products fall back to an O(p^2) column sweep; cap the size
# so accidental huge inputs fail fast instead of thrashing.
DENSE_FALLBACK_LIMIT = 2048


def _as_columns(v):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 1:
        return v[:, None], True
    return v, False


def _restore(out, was_vector):
    return out[:, 0] if was_vector else out


class DenseCovariance:
    """Explicit SPD matrix; the fallback handle and the test oracle."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self._factor = None

    @property
    def p(self):
        return self.matrix.shape[0]

    def _chol(self):
        if self._factor is None:
            self._factor = linalg.cholesky(self.matrix)
        return self._factor

    def matvec(self, v):
        cols, vec = _as_columns(v)
        return _restore(self.matrix @ cols, vec)

    def solve(self, v):
        cols, vec = _as_columns(v)
        out = cho_solve((self._chol().lower, True), cols, check_finite=False)
        return _restore(out, vec)

    def log_det(self):
        return self._chol().log_det

    def trace(self):
        return float(np.trace(self.matrix))

    def sample(self, n, rng):
        z = rng.standard_normal((n, self.p))
        return z @ self._chol().lower.T

    def dense(self):
        return self.matrix.copy()


class IdentityCovariance:
    def __init__(self, p):
        self.p = p

    def matvec(self, v):
        return np.array(v, dtype=np.float64)

    solve = matvec

    def log_det(self):
        return 0.0

    def trace(self):
        return float(self.p)

    def sample(self, n, rng):
        return rng.standard_normal((n, self.p))

    def dense(self):
        return np.eye(self.p)


class EquiCorrelation:
    """Sigma = (1 - rho) I + rho 1 1'.

    Inverse by Sherman-Morrison, sampling by the shared-factor identity
    x = sqrt(1 - rho) z + sqrt(rho) w 1 with scalar w (z drawn first).
    """

    def __init__(self, p, rho):
        if not 0.0 <= rho < 1.0:
            raise ValueError(f"need 0 <= rho < 1, got {rho}")
        self.p = p
        self.rho = rho

    def matvec(self, v):
        cols, vec = _as_columns(v)
        out = (1.0 - self.rho) * cols + self.rho * cols.sum(axis=0)
        return _restore(out, vec)

    def solve(self, v):
        cols, vec = _as_columns(v)
        shrink = self.rho / (1.0 - self.rho + self.p * self.rho)
        out = (cols - shrink * cols.sum(axis=0)) / (1.0 - self.rho)
        return _restore(out, vec)

    def log_det(self):
        return (self.p - 1) * math.log(1.0 - self.rho) + math.log(
            1.0 - self.rho + self.p * self.rho)

    def trace(self):
        return float(self.p)

    def sample(self, n, rng):
        z = rng.standard_normal((n, self.p))
        w = rng.standard_normal((n, 1))
        return math.sqrt(1.0 - self.rho) * z + math.sqrt(self.rho) * w

    def dense(self):
        return (1.0 - self.rho) * np.eye(self.p) + self.rho * np.ones((self.p, self.p))


class ArProcessCovariance:
    """Sigma = scale * ((rho^|i-j|)), the stationary AR(1) covariance.

    matvec runs two geometric recursions (O(p)); solve applies the exact
    tridiagonal inverse of the correlation matrix; sampling runs the AR
    recursion x_1 = e_1, x_i = rho x_{i-1} + sqrt(1 - rho^2) e_i.
    """

    def __init__(self, p, rho, scale=1.0):
        if not -1.0 < rho < 1.0:
            raise ValueError(f"need |rho| < 1, got {rho}")
        if scale <= 0.0:
            raise ValueError(f"need scale > 0, got {scale}")
        self.p = p
        self.rho = rho
        self.scale = scale

    def _corr_matvec(self, cols):
        if self.p == 1:
            return cols.copy()
        rho = self.rho
        forward = lfilter([0.0, rho], [1.0, -rho], cols, axis=0)
        backward = lfilter([0.0, rho], [1.0, -rho], cols[::-1], axis=0)[::-1]
        return cols + forward + backward

    def _corr_solve(self, cols):
        if self.p == 1:
            return cols.copy()
        rho = self.rho
        c = 1.0 / (1.0 - rho * rho)
        out = c * (1.0 + rho * rho) * cols
        out[0] = c * cols[0]
        out[-1] = c * cols[-1]
        out[1:] -= c * rho * cols[:-1]
        out[:-1] -= c * rho * cols[1:]
        return out

    def matvec(self, v):
        cols, vec = _as_columns(v)
        return _restore(self.scale * self._corr_matvec(cols), vec)

    def solve(self, v):
        cols, vec = _as_columns(v)
        return _restore(self._corr_solve(cols) / self.scale, vec)

    def log_det(self):
        return self.p * math.log(self.scale) + (self.p - 1) * math.log(
            1.0 - self.rho * self.rho)

    def trace(self):
        return self.p * self.scale

    def sample(self, n, rng):
        eps = rng.standard_normal((n, self.p))
        if self.p > 1:
            eps[:, 1:] *= math.sqrt(1.0 - self.rho * self.rho)
            x = lfilter([1.0], [1.0, -self.rho], eps, axis=1)
        else:
            x = eps
        return math.sqrt(self.scale) * x

    def dense(self):
        idx = np.arange(self.p)
        return self.scale * self.rho ** np.abs(idx[:, None] - idx[None, :])


class InverseArCovariance:
    """Sigma = scale * T^{-1} where T = ((rho^|i-j|)).

    The inverse correlation T^{-1} is tridiagonal, so Sigma itself is
    tridiagonal; solve applies T directly via the AR recursions, and
    sampling solves L' x = z against the closed-form AR Cholesky factor of
    T (an O(p) bidiagonal application).
    """

    def __init__(self, p, rho, scale=1.0):
        if not -1.0 < rho < 1.0:
            raise ValueError(f"need |rho| < 1, got {rho}")
        if scale <= 0.0:
            raise ValueError(f"need scale > 0, got {scale}")
        self.p = p
        self.rho = rho
        self.scale = scale
        self._corr = ArProcessCovariance(p, rho)

    def matvec(self, v):
        cols, vec = _as_columns(v)
        return _restore(self.scale * self._corr._corr_solve(cols), vec)

    def solve(self, v):
        cols, vec = _as_columns(v)
        return _restore(self._corr._corr_matvec(cols) / self.scale, vec)

    def log_det(self):
        return self.p * math.log(self.scale) - (self.p - 1) * math.log(
            1.0 - self.rho * self.rho)

    def trace(self):
        if self.p == 1:
            return self.scale
        rho2 = self.rho * self.rho
        return self.scale * (2.0 + (self.p - 2) * (1.0 + rho2)) / (1.0 - rho2)

    def sample(self, n, rng):
        z = rng.standard_normal((n, self.p))
        if self.p == 1:
            return math.sqrt(self.scale) * z
        s = math.sqrt(1.0 - self.rho * self.rho)
        x = np.empty_like(z)
        x[:, 1:-1] = (z[:, 1:-1] - self.rho * z[:, 2:]) / s
        x[:, 0] = z[:, 0] - (self.rho / s) * z[:, 1]
        x[:, -1] = z[:, -1] / s
        return math.sqrt(self.scale) * x

    def dense(self):
        if self.p == 1:
            return np.array([[self.scale]])
        rho = self.rho
        c = self.scale / (1.0 - rho * rho)
        out = np.zeros((self.p, self.p))
        np.fill_diagonal(out, c * (1.0 + rho * rho))
        out[0, 0] = out[-1, -1] = c
        idx = np.arange(self.p - 1)
        out[idx, idx + 1] = -c * rho
        out[idx + 1, idx] = -c * rho
        return out


class RotatedSpike:
    """Sigma = P diag(lam) P' with P square orthogonal."""

    def __init__(self, basis, lam):
        self.basis = np.asarray(basis, dtype=np.float64)
        self.lam = np.asarray(lam, dtype=np.float64)
        if np.any(self.lam <= 0.0):
            raise ValueError("spectrum must be strictly positive")
        self.p = self.basis.shape[0]

    def matvec(self, v):
        cols, vec = _as_columns(v)
        out = self.basis @ (self.lam[:, None] * (self.basis.T @ cols))
        return _restore(out, vec)

    def solve(self, v):
        cols, vec = _as_columns(v)
        out = self.basis @ ((self.basis.T @ cols) / self.lam[:, None])
        return _restore(out, vec)

    def log_det(self):
        return float(np.sum(np.log(self.lam)))

    def trace(self):
        return float(np.sum(self.lam))

    def sample(self, n, rng):
        z = rng.standard_normal((n, self.p))
        return (z * np.sqrt(self.lam)) @ self.basis.T

    def dense(self):
        return (self.basis * self.lam) @ self.basis.T


class SpikedIdentity:
    """Sigma = I_p + P diag(gamma) P' with P a p x r orthonormal block.

    r may be 0, in which case Sigma is the identity.  Inversion and square
    roots act only on the r-dimensional spike, so all operations cost
    O(p * r).
    """

    def __init__(self, p, basis, gamma):
        self.p = p
        self.basis = np.asarray(basis, dtype=np.float64).reshape(p, -1)
        self.gamma = np.asarray(gamma, dtype=np.float64).reshape(-1)
        if self.basis.shape[1] != self.gamma.shape[0]:
            raise ValueError("basis and spectrum sizes differ")
        if np.any(self.gamma <= -1.0):
            raise ValueError("spike spectrum must keep Sigma positive definite")

    def matvec(self, v):
        cols, vec = _as_columns(v)
        out = cols + self.basis @ (self.gamma[:, None] * (self.basis.T @ cols))
        return _restore(out, vec)

    def solve(self, v):
        cols, vec = _as_columns(v)
        shrink = self.gamma / (1.0 + self.gamma)
        out = cols - self.basis @ (shrink[:, None] * (self.basis.T @ cols))
        return _restore(out, vec)

    def log_det(self):
        return float(np.sum(np.log1p(self.gamma)))

    def trace(self):
        return float(self.p + np.sum(self.gamma))

    def sample(self, n, rng):
        z = rng.standard_normal((n, self.p))
        if self.gamma.size == 0:
            return z
        stretch = np.sqrt(1.0 + self.gamma) - 1.0
        return z + ((z @ self.basis) * stretch) @ self.basis.T

    def dense(self):
        return np.eye(self.p) + (self.basis * self.gamma) @ self.basis.T


class ScaledCovariance:
    """Sigma = scale * base, sharing the base representation."""

    def __init__(self, base, scale):
        if scale <= 0.0:
            raise ValueError(f"need scale > 0, got {scale}")
        self.base = base
        self.scale = scale

    @property
    def p(self):
        return self.base.p

    def matvec(self, v):
        return self.scale * self.base.matvec(v)

    def solve(self, v):
        return self.base.solve(v) / self.scale

    def log_det(self):
        return self.base.log_det() + self.p * math.log(self.scale)

    def trace(self):
        return self.scale * self.base.trace()

    def sample(self, n, rng):
        return math.sqrt(self.scale) * self.base.sample(n, rng)

    def dense(self):
        return self.scale * self.base.dense()


class BlockDiagonal:
    """Block-diagonal composition of structured blocks, applied slicewise.

    Sampling consumes the generator block by block in storage order.
    """

    def __init__(self, blocks):
        self.blocks = list(blocks)
        sizes = [b.p for b in self.blocks]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.p = int(self.offsets[-1])

    def _apply(self, cols, op):
        out = np.empty_like(cols)
        for block, lo, hi in zip(self.blocks, self.offsets, self.offsets[1:]):
            out[lo:hi] = op(block, cols[lo:hi])
        return out

    def matvec(self, v):
        cols, vec = _as_columns(v)
        return _restore(self._apply(cols, lambda b, c: b.matvec(c)), vec)

    def solve(self, v):
        cols, vec = _as_columns(v)
        return _restore(self._apply(cols, lambda b, c: b.solve(c)), vec)

    def log_det(self):
        return float(sum(b.log_det() for b in self.blocks))

    def trace(self):
        return float(sum(b.trace() for b in self.blocks))

    def sample(self, n, rng):
        return np.concatenate([b.sample(n, rng) for b in self.blocks], axis=1)

    def dense(self):
        out = np.zeros((self.p, self.p))
        for block, lo, hi in zip(self.blocks, self.offsets, self.offsets[1:]):
            out[lo:hi, lo:hi] = block.dense()
        return out


def _unwrap_scale(cov):
    if isinstance(cov, ScaledCovariance):
        return cov.base, cov.scale
    return cov, 1.0


def trace_solve_product(a, b, chunk=256):
    """Exact trace of ``a^{-1} b`` for two structured covariances.

    Scalar-multiple pairs (Sigma_b = c Sigma_a) reduce to ``c * p`` in
    closed form at any dimension.  Other pairs use an exact column sweep
    through the structured matvec and solve, which is limited to
    p <= DENSE_FALLBACK_LIMIT to bound its O(p^2) cost.
    """
    if a.p != b.p:
        raise ValueError(f"dimension mismatch: {a.p} vs {b.p}")
    base_a, scale_a = _unwrap_scale(a)
    base_b, scale_b = _unwrap_scale(b)
    if base_a is base_b:
        return base_a.p * scale_b / scale_a
    p = a.p
    if p > DENSE_FALLBACK_LIMIT:
        raise ValueError(
            f"generic trace product limited to p <= {DENSE_FALLBACK_LIMIT}, got {p}")
    total = 0.0
    for lo in range(0, p, chunk):
        hi = min(lo + chunk, p)
        eye_cols = np.zeros((p, hi - lo))
        eye_cols[np.arange(lo, hi), np.arange(hi - lo)] = 1.0
        solved = a.solve(b.matvec(eye_cols))
        total += float(solved[np.arange(lo, hi), np.arange(hi - lo)].sum())
    return total
