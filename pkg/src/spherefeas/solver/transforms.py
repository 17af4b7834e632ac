"""Instance transformations used by the rescaling variants, plus degenerate reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..numkit import RANK_RTOL, factorize
from ..sphere import SphericalInstance, beta_d, psi_alpha_rows, vertex_diameter
from .steps import ActiveSet, circumcenter


class TriggerNotMet(ValueError):
    pass


class Unsolvable(ValueError):
    pass


class EmptyReduction(ValueError):
    pass


class PreconditionViolated(ValueError):
    pass


def _normals_of(inst):
    return inst.normals if isinstance(inst, SphericalInstance) else np.asarray(inst, float)


def rescale_lambda(c: float, d: int) -> float:
    """lambda such that (I + lam u u^T) a, renormalized, has inner product -sqrt(2/d) with u.

    ``c = a^T u`` must be negative.  Writing ``z = c (1 + lam)`` the
    condition reads ``z / sqrt(1 - c^2 + z^2) = -sqrt(2/d)``.
    """
    tau2 = 2.0 / d
    if tau2 >= 1.0:
        raise Unsolvable(f"target sqrt(2/d) >= 1 for d={d}")
    if not c < 0.0:
        raise TriggerNotMet("constraint is not violated")
    s = math.sqrt(max(0.0, 1.0 - c * c))
    z = -s * math.sqrt(tau2 / (1.0 - tau2))
    return z / c - 1.0


def rescale_violation(inst, state: ActiveSet, x_k, r: int, trigger=None, d=None):
    """Apply ``a_i -> (I + lam u u^T) a_i`` (renormalized) with ``u = x_k/|x_k|``.

    Returns ``(normals, state, lam)``.  All normals are mapped; the active
    set's factorization gets one rank-one update and a uniform rescale (its
    normals share the inner product with ``u``) and is then checked against
    a from-scratch factorization.
    """
    normals = _normals_of(inst)
    if d is None:
        d = normals.shape[1] - 1
    if trigger is None:
        trigger = 1.0 / math.sqrt(d)
    u = np.asarray(x_k, float)
    u = u / np.linalg.norm(u)
    c = float(normals[r] @ u)
    v = -c
    if not (0.0 < v <= trigger):
        raise TriggerNotMet(f"violation {v!r} not in (0, {trigger!r}]")
    lam = rescale_lambda(c, d)

    proj = normals @ u
    new = normals + lam * np.outer(proj, u)
    new /= np.linalg.norm(new, axis=1)[:, None]

    q_proj = proj[state.indices]
    g = float(q_proj.mean())
    scale = 1.0 / math.sqrt(1.0 + (2.0 * lam + lam * lam) * g * g)
    fact = state.fact.rank_one_update(lam * u, q_proj, scale)
    ref = factorize(new[state.indices].T)
    if np.max(np.abs(fact.reconstruct() - ref.reconstruct())) > 1e-8:
        fact = ref
    # the old barycentric weights still give the (mapped) circumcenter
    center = (state.center + lam * float(u @ state.center) * u) * scale
    new_state = ActiveSet(new, list(state.indices), fact, state.mu.copy(), center)
    return new, new_state, lam


def transform_polynomial(inst, state: ActiveSet):
    """Stretch the feasible region by 2 along the vertex-diameter witness of the active simplex.

    Points move by Psi_2 about the pole ``a_w``; the normals therefore move by
    the inverse map Psi_{1/2}.  Returns ``(normals, pole_index)``.
    """
    normals = _normals_of(inst)
    d = normals.shape[1] - 1
    threshold = beta_d(d) / (d + 1)
    if state.size < 2 or not state.center_in_hull or state.deficiency >= threshold:
        raise PreconditionViolated("transform needs a nearly positively spanning set below the trigger")
    pts = normals[state.indices]
    _, w = vertex_diameter(pts)
    pole = pts[w].copy()
    return psi_alpha_rows(normals, 0.5, pole), state.indices[w]


@dataclass(frozen=True)
class ReducedInstance:
    """Spherical instance restricted to the orthogonal complement of a span.

    ``basis`` has orthonormal columns spanning the complement; reduced normal
    ``j`` is the normalized projection of original normal ``kept[j]``.
    """

    instance: SphericalInstance
    basis: np.ndarray
    kept: Tuple[int, ...]
    scales: np.ndarray
    equalities: Tuple[int, ...]

    def lift(self, y) -> np.ndarray:
        return self.basis @ np.asarray(y, float)


def reduce_degenerate(inst, span_indices) -> ReducedInstance:
    """Project all normals onto the complement of span{a_i : i in span_indices}.

    Normals that vanish under the projection (they lie in the span) turn into
    implied equalities and are dropped; the others are renormalized.
    """
    normals = _normals_of(inst)
    span_indices = sorted(set(int(i) for i in span_indices))
    D = normals.shape[1]
    u, s, _ = np.linalg.svd(normals[span_indices].T, full_matrices=True)
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    if rank >= D:
        raise EmptyReduction("the span is the whole space")
    basis = u[:, rank:]
    for j in range(basis.shape[1]):
        nz = np.flatnonzero(np.abs(basis[:, j]) > 1e-12)
        if nz.size and basis[nz[0], j] < 0:
            basis[:, j] = -basis[:, j]
    proj = normals @ basis
    norms = np.linalg.norm(proj, axis=1)
    keep = norms > RANK_RTOL
    keep[span_indices] = False
    kept = tuple(int(i) for i in np.flatnonzero(keep))
    equalities = tuple(int(i) for i in np.flatnonzero(~keep))
    if not kept:
        # everything is an equality: the reduced problem is trivially feasible
        reduced = SphericalInstance(np.eye(basis.shape[1])[:1])
        return ReducedInstance(reduced, basis, (), np.zeros(0), equalities)
    reduced = SphericalInstance(proj[list(kept)] / norms[list(kept), None])
    return ReducedInstance(reduced, basis, kept, norms[list(kept)], equalities)


def positive_null_vector(cols):
    """Nonnegative, sum-one weights ``w`` with ``cols @ w = 0`` for a positively spanning set.

    Returns None when the (1-dimensional) null space has mixed signs.
    """
    cols = np.asarray(cols, float)
    _, _, vt = np.linalg.svd(cols, full_matrices=True)
    w = vt[-1]
    if w.sum() < 0:
        w = -w
    scale = np.abs(w).max()
    if np.any(w < -1e-9 * scale):
        return None
    w = np.clip(w, 0.0, None)
    return w / w.sum()


def lift_reduced_certificate(normals, span_indices, reduced: ReducedInstance, indices, coef):
    """Turn a certificate of the reduced instance into one for the full normal set.

    The reduced certificate gives a nonnegative combination ``w`` of original
    normals lying in the span; ``-w`` is written as a combination of the span
    set and shifted along its positive dependency until every weight is
    nonnegative and one of them is zero.
    """
    normals = np.asarray(normals, float)
    orig = [reduced.kept[i] for i in indices]
    weights = np.asarray(coef, float) / reduced.scales[list(indices)]
    w = weights @ normals[orig]
    span_indices = list(span_indices)
    s_cols = normals[span_indices].T
    theta = positive_null_vector(s_cols)
    if theta is None:
        raise ArithmeticError("span set is not positively spanning")
    kappa0, *_ = np.linalg.lstsq(s_cols, -w, rcond=None)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(theta > 0, -kappa0 / theta, -np.inf)
    shift = float(np.max(ratios))
    kappa = kappa0 + shift * theta
    kappa = np.clip(kappa, 0.0, None)
    zero = int(np.argmin(kappa))
    idx = orig + [j for p, j in enumerate(span_indices) if p != zero]
    mu = np.concatenate([weights, np.delete(kappa, zero)])
    mu /= mu.sum()
    order = np.argsort(idx)
    return tuple(int(idx[i]) for i in order), mu[order]


def eq17_fixture(epsilon: float, delta: float) -> float:
    """Next third coordinate eta of the iterate (0, 1, eta) in the slow-progress example."""
    return delta + epsilon * math.sqrt(1.0 + delta * delta) / math.sqrt(1.0 + epsilon * epsilon)


def slow_progress_instance(epsilon: float, deltas, dim: int = 3) -> SphericalInstance:
    """Normals (1, eps, 0), (-1, eps, 0) and (0, -delta_j, 1) for each delta_j, normalized."""
    rows = [[1.0, epsilon, 0.0], [-1.0, epsilon, 0.0]]
    rows += [[0.0, -dl, 1.0] for dl in deltas]
    a = np.zeros((len(rows), dim))
    a[:, :3] = rows
    return SphericalInstance(a / np.linalg.norm(a, axis=1)[:, None])


def entry_size(value: float, cap: int = 64) -> Tuple[int, bool]:
    """(1 + encoding length of the shortest dyadic fraction, capped)."""
    p, q = float(value).as_integer_ratio()
    bits = abs(p).bit_length() + q.bit_length()
    return 1 + min(cap, bits), bits > cap


def estimate_size_L(data, cap: int = 64) -> Tuple[int, bool]:
    """Instance size estimate summed over all entries; also reports whether any entry was capped."""
    total, capped = 0, False
    for v in np.asarray(data, float).ravel():
        s, c = entry_size(v, cap)
        total += s
        capped |= c
    return total, capped


def polynomial_budget(d: int, L: int) -> Tuple[int, int]:
    """(max number of transforms 6(d+2)L, inner expansion budget t^2 with t = ceil((d+1)/beta_d))."""
    t = math.ceil((d + 1) / beta_d(d))
    return 6 * (d + 2) * L, t * t


__all__ = [
    "EmptyReduction", "PreconditionViolated", "ReducedInstance", "TriggerNotMet", "Unsolvable",
    "circumcenter", "entry_size", "eq17_fixture", "estimate_size_L", "lift_reduced_certificate",
    "polynomial_budget", "positive_null_vector", "reduce_degenerate", "slow_progress_instance",
    "rescale_lambda", "rescale_violation", "transform_polynomial",
]
