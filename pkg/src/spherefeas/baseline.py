"""Reference decision procedures: a phase-I style dense simplex and brute-force enumeration.

The simplex variant reads ``A x >= b`` as the dual of the standard form
problem ``max b^T y  s.t.  A^T y = c, y >= 0``.  A basis is built with ``d``
pivots on ``A^T``; the right-hand side ``c`` is then chosen so that the basic
solution is all ones.  A finite optimum gives a feasible ``x`` solving the
basic constraints with equality, an unbounded ray is a Farkas certificate
of infeasibility.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .problems import EuclideanInstance

PIVOT_TOL = 1e-9
REFRESH_EVERY = 50


class Cycling(RuntimeError):
    pass


class TooLarge(ValueError):
    pass


class SingularBasis(ArithmeticError):
    pass


@dataclass
class SimplexResult:
    status: str  # "feasible" | "infeasible"
    point: Optional[np.ndarray]
    pivots: int
    init_pivots: int
    basis: tuple

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


class Tableau:
    """Dense tableau ``B^{-1} A^T`` with basis, right-hand side and reduced costs."""

    def __init__(self, a_t: np.ndarray, cost: np.ndarray):
        self.a_t = a_t
        self.cost = cost
        self.m, self.n = a_t.shape
        self.t = a_t.copy()
        self.rhs = np.zeros(self.m)
        self.basis = [-1] * self.m

    def pivot(self, row: int, col: int) -> None:
        p = self.t[row, col]
        self.t[row] /= p
        self.rhs[row] /= p
        f = self.t[:, col].copy()
        f[row] = 0.0
        self.t -= np.outer(f, self.t[row])
        self.rhs -= f * self.rhs[row]
        self.basis[row] = col

    def refresh(self, c: np.ndarray) -> None:
        """Recompute the tableau from the basis to shed accumulated rounding."""
        bm = self.a_t[:, self.basis]
        self.t = np.linalg.solve(bm, self.a_t)
        self.rhs = np.linalg.solve(bm, c)

    def reduced_costs(self) -> np.ndarray:
        r = self.cost - self.cost[self.basis] @ self.t
        r[self.basis] = 0.0
        return r


def _initial_basis(tab: Tableau) -> int:
    """Greedy largest-pivot column selection, one row at a time."""
    used = np.zeros(tab.n, dtype=bool)
    for row in range(tab.m):
        vals = np.abs(tab.t[row])
        vals[used] = -1.0
        col = int(np.argmax(vals))
        if vals[col] <= PIVOT_TOL * max(1.0, np.abs(tab.a_t).max()):
            raise SingularBasis("constraint normals do not span R^d")
        tab.pivot(row, col)
        used[col] = True
    return tab.m


def simplex_feasibility(inst: EuclideanInstance, max_pivots: Optional[int] = None) -> SimplexResult:
    """Decide ``A x >= b``; the reported ``pivots`` exclude the ``d`` basis-building pivots."""
    a = np.asarray(inst.normals, float)
    b = np.asarray(inst.offsets, float)
    n, d = a.shape
    if n < d:
        raise SingularBasis("need n >= d")
    tab = Tableau(a.T.copy(), b.copy())
    init = _initial_basis(tab)
    c = a[tab.basis].T @ np.ones(d)
    tab.refresh(c)
    tab.rhs = np.ones(d)

    if max_pivots is None:
        max_pivots = 100 * (n + d)
    pivots = degenerate_run = degenerate_total = 0
    while True:
        r = tab.reduced_costs()
        scale = max(1.0, float(np.abs(b).max()))
        cand = np.flatnonzero(r > PIVOT_TOL * scale)
        if cand.size == 0:
            x = np.linalg.solve(a[tab.basis], b[tab.basis])
            return SimplexResult("feasible", x, pivots, init, tuple(tab.basis))
        bland = degenerate_run >= d
        col = int(cand[0]) if bland else int(cand[np.argmax(r[cand])])
        colv = tab.t[:, col]
        rows = np.flatnonzero(colv > PIVOT_TOL)
        if rows.size == 0:
            return SimplexResult("infeasible", None, pivots, init, tuple(tab.basis))
        ratios = np.clip(tab.rhs[rows], 0.0, None) / colv[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * max(1.0, best)]
        row = int(min(tied, key=lambda i: tab.basis[i]))
        tab.pivot(row, col)
        pivots += 1
        if best <= 1e-12:
            degenerate_run += 1
            degenerate_total += 1
            if degenerate_total > 50 * n:
                raise Cycling(f"{degenerate_total} degenerate pivots")
        else:
            degenerate_run = 0
        if pivots % REFRESH_EVERY == 0:
            tab.refresh(c)
        if pivots > max_pivots:
            raise Cycling(f"no termination after {pivots} pivots")


def brute_force_feasible(inst: EuclideanInstance, cloud: int = 2000, seed: int = 0, tol: float = 1e-9) -> bool:
    """Exhaustive check over all vertices of the arrangement plus a random point cloud.

    Only meant as a test oracle for small instances (d <= 4, n <= 60).
    """
    a = np.asarray(inst.normals, float)
    b = np.asarray(inst.offsets, float)
    n, d = a.shape
    if d > 4 or n > 60:
        raise TooLarge(f"brute force limited to d <= 4, n <= 60 (got d={d}, n={n})")
    tol = tol * (1.0 + float(np.abs(b).max()))

    def any_ok(pts):
        return bool(np.any(np.all(pts @ a.T - b >= -tol, axis=1)))

    # lineality space: reduce to the row space of A
    _, s, vt = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > 1e-12 * s[0]))
    basis = vt[:rank].T
    ar = a @ basis

    if rank > 0:
        subsets = np.array(list(itertools.combinations(range(n), rank)), dtype=int)
        mats = ar[subsets]
        rhs = b[subsets]
        dets = np.abs(np.linalg.det(mats))
        ok = dets > 1e-12
        if np.any(ok):
            sols = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
            if any_ok(sols @ basis.T):
                return True
    else:
        return bool(np.all(b <= tol))

    rng = np.random.default_rng(seed)
    center = np.linalg.lstsq(a, b, rcond=None)[0]
    spread = 1.0 + np.abs(center).max()
    pts = center + spread * rng.uniform(-2.0, 2.0, size=(cloud, d))
    return any_ok(pts)


__all__ = [
    "Cycling", "SimplexResult", "SingularBasis", "Tableau", "TooLarge",
    "brute_force_feasible", "simplex_feasibility",
]
