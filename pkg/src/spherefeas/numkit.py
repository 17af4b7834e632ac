"""Dense QR factorization with column append/remove and rank-one updates.

Matrices are plain ``numpy`` float64 arrays.  An :class:`OrthoFactorization`
keeps a thin ``Q`` (ambient_dim x k, orthonormal columns), an upper
triangular ``R`` (k x k) and the columns themselves, so that every update can
be checked against (and periodically regenerated from) a from-scratch
factorization.

All update methods return a new object; the receiver is never modified.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_triangular

RANK_RTOL = 1e-8
REFRESH_EVERY = 1000


class RankDeficientError(ValueError):
    """A column is (numerically) in the span of the others."""

    def __init__(self, index, msg=None):
        self.index = index
        super().__init__(msg or f"column {index} is rank deficient")


class NonFiniteError(ValueError):
    pass


def _check_finite(arr, what="matrix"):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{what} contains NaN or Inf")


def _givens(a, b):
    """Return (c, s) with [c s; -s c] @ [a; b] = [r; 0]."""
    if b == 0.0:
        return 1.0, 0.0
    r = math.hypot(a, b)
    return a / r, b / r


def _rotate_rows(m, i, j, c, s):
    ri = m[i].copy()
    m[i] = c * ri + s * m[j]
    m[j] = -s * ri + c * m[j]


def _rotate_cols(m, i, j, c, s):
    # keeps Q @ R invariant when rows i, j of R get the same rotation
    ci = m[:, i].copy()
    m[:, i] = c * ci + s * m[:, j]
    m[:, j] = -s * ci + c * m[:, j]


class OrthoFactorization:
    """Thin QR factorization ``cols = q @ r`` of a full-column-rank matrix."""

    __slots__ = ("q", "r", "cols", "updates")

    def __init__(self, q, r, cols, updates=0):
        self.q = q
        self.r = r
        self.cols = cols
        self.updates = updates

    @classmethod
    def empty(cls, ambient_dim: int) -> "OrthoFactorization":
        if ambient_dim < 1:
            raise ValueError("ambient_dim must be >= 1")
        z = np.zeros((ambient_dim, 0))
        return cls(z, np.zeros((0, 0)), z.copy())

    @property
    def ambient_dim(self) -> int:
        return self.q.shape[0]

    @property
    def ncols(self) -> int:
        return self.q.shape[1]

    def reconstruct(self) -> np.ndarray:
        return self.q @ self.r

    def _tau(self, extra=None) -> float:
        norms = [float(np.max(np.linalg.norm(self.cols, axis=0)))] if self.ncols else []
        if extra is not None:
            norms.append(float(np.linalg.norm(extra)))
        return RANK_RTOL * max(norms) if norms else 0.0

    def _bump(self, q, r, cols) -> "OrthoFactorization":
        updates = self.updates + 1
        if updates >= REFRESH_EVERY:
            return factorize(cols)
        return OrthoFactorization(q, r, cols, updates)

    def append_column(self, a) -> "OrthoFactorization":
        """Add ``a`` as the last column in O(d*k)."""
        a = np.asarray(a, dtype=float)
        if a.shape != (self.ambient_dim,):
            raise ValueError(f"expected vector of length {self.ambient_dim}")
        _check_finite(a, "column")
        k = self.ncols
        # classical Gram-Schmidt with one reorthogonalization pass
        h = self.q.T @ a
        w = a - self.q @ h
        h2 = self.q.T @ w
        w -= self.q @ h2
        h += h2
        rho = float(np.linalg.norm(w))
        if rho <= self._tau(a):
            raise RankDeficientError(k)
        q = np.empty((self.ambient_dim, k + 1))
        q[:, :k] = self.q
        q[:, k] = w / rho
        r = np.zeros((k + 1, k + 1))
        r[:k, :k] = self.r
        r[:k, k] = h
        r[k, k] = rho
        cols = np.column_stack([self.cols, a])
        return self._bump(q, r, cols)

    def remove_column(self, idx: int) -> "OrthoFactorization":
        """Delete column ``idx`` and re-triangularize with Givens rotations."""
        k = self.ncols
        if not 0 <= idx < k:
            raise IndexError(f"column index {idx} out of range for {k} columns")
        r = np.delete(self.r, idx, axis=1)
        q = self.q.copy()
        for j in range(idx, k - 1):
            c, s = _givens(r[j, j], r[j + 1, j])
            _rotate_rows(r, j, j + 1, c, s)
            _rotate_cols(q, j, j + 1, c, s)
            r[j + 1, j] = 0.0
        cols = np.delete(self.cols, idx, axis=1)
        return self._bump(q[:, : k - 1], r[: k - 1, :], cols)

    def rank_one_update(self, w, v, scale: float = 1.0) -> "OrthoFactorization":
        """Factorization of ``scale * (A + w v^T)`` where ``A`` is the current matrix."""
        w = np.asarray(w, dtype=float)
        v = np.asarray(v, dtype=float)
        k = self.ncols
        if w.shape != (self.ambient_dim,) or v.shape != (k,):
            raise ValueError("shape mismatch in rank-one update")
        _check_finite(w, "w")
        _check_finite(v, "v")
        if scale == 0.0 or not math.isfinite(scale):
            raise ValueError("scale must be finite and nonzero")
        cols = scale * (self.cols + np.outer(w, v))
        if k == 0:
            return OrthoFactorization(self.q.copy(), self.r.copy(), cols, self.updates)

        s = self.q.T @ w
        wp = w - self.q @ s
        s2 = self.q.T @ wp
        wp -= self.q @ s2
        s += s2
        rho = float(np.linalg.norm(wp))
        if rho > 1e-14 * max(float(np.linalg.norm(w)), 1e-300):
            q = np.column_stack([self.q, wp / rho])
            r = np.vstack([self.r, np.zeros((1, k))])
            u = np.append(s, rho)
        else:
            q = self.q.copy()
            r = self.r.copy()
            u = s.copy()
        m = u.shape[0]
        # fold u onto e1; R picks up a subdiagonal
        for i in range(m - 1, 0, -1):
            c, sn = _givens(u[i - 1], u[i])
            u[i - 1] = c * u[i - 1] + sn * u[i]
            u[i] = 0.0
            _rotate_rows(r, i - 1, i, c, sn)
            _rotate_cols(q, i - 1, i, c, sn)
        r[0] += u[0] * v
        # back to upper triangular
        for j in range(min(k, m - 1)):
            c, sn = _givens(r[j, j], r[j + 1, j])
            _rotate_rows(r, j, j + 1, c, sn)
            _rotate_cols(q, j, j + 1, c, sn)
            r[j + 1, j] = 0.0
        q = q[:, :k]
        r = scale * r[:k, :]
        tau = RANK_RTOL * float(np.max(np.linalg.norm(cols, axis=0)))
        small = np.flatnonzero(np.abs(np.diag(r)) <= tau)
        if small.size:
            raise RankDeficientError(int(small[0]))
        return self._bump(q, r, cols)

    def least_squares(self, b):
        """Split ``b = cols @ coef + residual`` with the residual orthogonal to every column."""
        b = np.asarray(b, dtype=float)
        if b.shape != (self.ambient_dim,):
            raise ValueError(f"expected vector of length {self.ambient_dim}")
        if self.ncols == 0:
            return np.zeros(0), b.copy()
        h = self.q.T @ b
        res = b - self.q @ h
        h2 = self.q.T @ res
        res -= self.q @ h2
        h += h2
        coef = solve_triangular(self.r, h, lower=False)
        return coef, res

    def gram_solve(self, rhs):
        """Solve ``(cols^T cols) z = rhs`` through the triangular factor."""
        y = solve_triangular(self.r, rhs, trans="T", lower=False)
        return solve_triangular(self.r, y, lower=False)

    def __repr__(self):
        return f"OrthoFactorization(ambient_dim={self.ambient_dim}, ncols={self.ncols})"


def factorize(m) -> OrthoFactorization:
    """From-scratch Householder QR (LAPACK) of a full-column-rank matrix."""
    m = np.array(m, dtype=float, copy=True)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2 or m.shape[0] < 1:
        raise ValueError("expected a 2-d matrix with at least one row")
    _check_finite(m)
    rows, k = m.shape
    if k == 0:
        return OrthoFactorization.empty(rows)
    if k > rows:
        raise RankDeficientError(rows, "more columns than rows")
    q, r = np.linalg.qr(m, mode="reduced")
    # positive diagonal convention
    sg = np.where(np.diag(r) < 0, -1.0, 1.0)
    q = q * sg
    r = r * sg[:, None]
    tau = RANK_RTOL * float(np.max(np.linalg.norm(m, axis=0)))
    small = np.flatnonzero(np.diag(r) <= tau)
    if small.size:
        raise RankDeficientError(int(small[0]))
    return OrthoFactorization(q, r, m)


# module-level spellings of the update operations
def append_column(f: OrthoFactorization, a) -> OrthoFactorization:
    return f.append_column(a)


def remove_column(f: OrthoFactorization, idx: int) -> OrthoFactorization:
    return f.remove_column(idx)


def rank_one_update(f: OrthoFactorization, w, v, scale=1.0) -> OrthoFactorization:
    return f.rank_one_update(w, v, scale)


def least_squares(f: OrthoFactorization, b):
    return f.least_squares(b)
