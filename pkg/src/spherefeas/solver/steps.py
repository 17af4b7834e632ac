"""Active sets and the single-step moves of the relaxation algorithms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..numkit import RANK_RTOL, OrthoFactorization, factorize
from ..sphere import TAU_ZERO, TouchingSphere

TIE_RTOL = 1e-12


class DegenerateRatioTest(ArithmeticError):
    pass


@dataclass
class ActiveSet:
    """Constraint subset Q_k, the QR factorization of its normals and its circumcenter.

    ``normals`` is a reference to the full (working) normal matrix; only the
    rows in ``indices`` take part.  ``mu`` are the barycentric coefficients
    of ``center`` over those rows.
    """

    normals: np.ndarray
    indices: List[int]
    fact: OrthoFactorization
    mu: np.ndarray
    center: np.ndarray

    @classmethod
    def start(cls, normals, j: int = 0) -> "ActiveSet":
        a = normals[j]
        return cls(normals, [j], factorize(a[:, None]), np.ones(1), a.copy())

    @classmethod
    def from_indices(cls, normals, indices) -> "ActiveSet":
        indices = list(indices)
        fact = factorize(normals[indices].T) if indices else OrthoFactorization.empty(normals.shape[1])
        st = cls(normals, indices, fact, np.zeros(0), np.zeros(normals.shape[1]))
        st.mu, st.center = circumcenter(fact)
        return st

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def deficiency(self) -> float:
        return float(np.linalg.norm(self.center))

    @property
    def center_in_hull(self) -> bool:
        return bool(np.all(self.mu >= -TAU_ZERO))

    @property
    def sphere(self) -> TouchingSphere:
        dfc = self.deficiency
        return TouchingSphere(
            self.center, float(np.sqrt(max(0.0, 1.0 - dfc * dfc))), self.mu,
            self.center_in_hull, dfc, self.normals[self.indices],
        )

    def equal_products_error(self) -> float:
        """max |a_i^T x - a_j^T x| over the active normals."""
        if self.size < 2:
            return 0.0
        p = self.normals[self.indices] @ self.center
        return float(p.max() - p.min())

    def without(self, pos: int) -> "ActiveSet":
        fact = self.fact.remove_column(pos)
        idx = self.indices[:pos] + self.indices[pos + 1:]
        mu, c = circumcenter(fact)
        return ActiveSet(self.normals, idx, fact, mu, c)

    def rebuilt(self) -> "ActiveSet":
        return ActiveSet.from_indices(self.normals, self.indices)


def circumcenter(fact: OrthoFactorization):
    """Barycentric coefficients and point of the projection of the origin on aff(cols).

    For linearly independent unit columns this point has equal inner
    product with every column: mu is proportional to G^{-1} 1.
    """
    k = fact.ncols
    if k == 0:
        return np.zeros(0), np.zeros(fact.ambient_dim)
    z = fact.gram_solve(np.ones(k))
    mu = z / z.sum()
    return mu, fact.cols @ mu


@dataclass
class Expansion:
    """Result of computing the touching-sphere center of Q_k + {a_m}.

    ``kind`` is ``"accepted"``, ``"needs_drop"`` or ``"spanning"``.
    ``coef`` are barycentric coefficients of ``center`` over ``indices``
    (Q_k in order, then m when m is part of the set).
    """

    kind: str
    indices: List[int]
    coef: np.ndarray
    center: np.ndarray
    state: Optional[ActiveSet] = None


def step_expand(state: ActiveSet, m: Optional[int]) -> Expansion:
    """Center of the touching sphere of ``state.indices + [m]``.

    The entering normal is split by least squares against the active
    columns, ``a_m = a + sum(lam_i a_i)`` with ``a`` orthogonal to all of
    them.  If ``a`` vanishes the set is linearly dependent and the origin is
    an affine combination of it.  Otherwise the center is a multiple of
    ``c_Q + rho a``, where ``c_Q`` is the circumcenter of Q_k and ``rho``
    makes the inner product with ``a_m`` match the others.

    ``m=None`` evaluates Q_k on its own (used after the entering normal
    itself has left in a drop step).
    """
    normals = state.normals
    if m is None:
        kind = "accepted" if state.center_in_hull else "needs_drop"
        return Expansion(kind, list(state.indices), state.mu.copy(), state.center.copy(),
                         state if kind == "accepted" else None)
    a_m = normals[m]
    S = state.indices + [m]
    if state.size == 0:
        new = ActiveSet(normals, [m], factorize(a_m[:, None]), np.ones(1), a_m.copy())
        return Expansion("accepted", S, np.ones(1), a_m.copy(), new)

    lam, a_perp = state.fact.least_squares(a_m)
    tau = RANK_RTOL * max(1.0, float(np.linalg.norm(a_m)))
    nperp = float(np.linalg.norm(a_perp))
    if nperp <= tau:
        denom = 1.0 - lam.sum()
        if abs(denom) <= 1e-12:
            raise ArithmeticError("entering normal lies in the affine hull of the active set")
        coef = np.append(-lam, 1.0) / denom
        kind = "spanning" if np.all(coef >= -TAU_ZERO) else "needs_drop"
        return Expansion(kind, S, coef, np.zeros(normals.shape[1]))

    c_q = state.center
    gamma = float(c_q @ c_q)
    rho = (gamma - float(a_m @ c_q)) / (nperp * nperp)
    coefp = np.append(state.mu - rho * lam, rho)
    total = coefp.sum()
    if not total > 0:
        raise ArithmeticError("touching-sphere normalization failed")
    coef = coefp / total
    center = (c_q + rho * a_perp) / total
    if np.all(coef >= -TAU_ZERO):
        fact = state.fact.append_column(a_m)
        mu = np.clip(coef, 0.0, None)
        mu /= mu.sum()
        return Expansion("accepted", S, coef, center, ActiveSet(normals, S, fact, mu, center))
    return Expansion("needs_drop", S, coef, center)


def ratio_test(y, c, indices):
    """First coordinate to vanish on the segment from ``y`` to ``c`` (barycentric).

    Returns ``(position, step)``.  Ties within a relative 1e-12 go to the
    smallest constraint index.
    """
    y = np.clip(np.asarray(y, float), 0.0, None)
    c = np.asarray(c, float)
    cand = np.flatnonzero(c < -TAU_ZERO)
    if cand.size == 0:
        raise DegenerateRatioTest("no coordinate decreases through zero")
    steps = y[cand] / (y[cand] - c[cand])
    smin = steps.min()
    tied = cand[steps <= smin + TIE_RTOL * max(1.0, smin)]
    pos = min(tied, key=lambda p: indices[p])
    return int(pos), float(smin)


def step_drop(state: ActiveSet, m: Optional[int], y, c):
    """Move ``y`` towards the center ``c`` until it hits the relative boundary.

    ``y`` and ``c`` are barycentric coordinates over ``state.indices`` plus
    ``m`` (if given).  The vertex whose coordinate vanishes first leaves.
    Returns ``(reduced_state, entering, new_y)``; ``entering`` becomes None
    if the entering normal itself was the one to leave, which can only
    happen when ``y`` was not equiangular to Q_k (the monotone variants).
    """
    S = state.indices + ([] if m is None else [m])
    pos, step = ratio_test(y, c, S)
    y_new = np.asarray(y, float) + step * (np.asarray(c, float) - np.asarray(y, float))
    y_new = np.delete(y_new, pos)
    y_new = np.clip(y_new, 0.0, None)
    y_new /= y_new.sum()
    if m is not None and pos == len(S) - 1:
        return state, None, y_new
    return state.without(pos), m, y_new


def monotone_y(x_k, a_m) -> np.ndarray:
    """Point on the line through ``x_k`` and ``a_m`` closest to the origin."""
    x_k = np.asarray(x_k, float)
    a_m = np.asarray(a_m, float)
    t = segment_parameter(x_k, a_m)
    return x_k + t * (a_m - x_k)


def segment_parameter(x_k, a_m) -> float:
    diff = a_m - x_k
    return float((x_k @ x_k - x_k @ a_m) / (diff @ diff))
