"""Spherical geometry for the homogenized feasibility problem.

Points of the unit sphere S^d are float arrays of length d+1.  A
:class:`SphericalInstance` stores its constraint normals as the rows of an
``(n, d+1)`` array; a point ``x`` is feasible when ``normals @ x >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .numkit import RankDeficientError, factorize

UNIT_TOL = 1e-10
TAU_ZERO = 1e-10
TAU_POLE = 1e-12


class ZeroConstraintError(ValueError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"constraint {index} has a = 0 and b = 0")


class AtInfinityError(ValueError):
    pass


class AffinelyDependentError(ValueError):
    pass


class PreconditionViolated(ValueError):
    pass


def as_unit(x, tol=UNIT_TOL) -> np.ndarray:
    """Validate that ``x`` has unit length and return it as a float array."""
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > tol:
        raise ValueError(f"not a unit vector (norm {np.linalg.norm(x)!r})")
    return x


def normalize(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x)


def angle(x, y) -> float:
    """Spherical distance between two unit vectors."""
    return math.acos(min(1.0, max(-1.0, float(np.dot(x, y)))))


@dataclass(frozen=True)
class HomogenizationMeta:
    """How a spherical instance was obtained from a Euclidean one.

    ``require_positive_last`` records the side condition x_{d+1} > 0; the
    solver enforces it by adding the pole normal e_{d+1} as constraint ``n``.
    """

    dim: int
    require_positive_last: bool = True


@dataclass(frozen=True)
class SphericalInstance:
    normals: np.ndarray
    origin_meta: Optional[HomogenizationMeta] = None

    def __post_init__(self):
        a = np.array(self.normals, dtype=float)
        if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
            raise ValueError("normals must be a nonempty (n, d+1) array")
        if not np.all(np.isfinite(a)):
            raise ValueError("normals must be finite")
        dev = np.abs(np.linalg.norm(a, axis=1) - 1.0)
        if np.any(dev > UNIT_TOL):
            raise ValueError(f"normal {int(np.argmax(dev))} is not a unit vector")
        a.setflags(write=False)
        object.__setattr__(self, "normals", a)

    @property
    def n(self) -> int:
        return self.normals.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.normals.shape[1]

    @property
    def dim(self) -> int:
        """Dimension d of the sphere S^d."""
        return self.normals.shape[1] - 1

    def working_normals(self) -> np.ndarray:
        """Normals actually handed to the solver (pole appended when required)."""
        if self.origin_meta is not None and self.origin_meta.require_positive_last:
            pole = np.zeros(self.ambient_dim)
            pole[-1] = 1.0
            return np.vstack([self.normals, pole])
        return self.normals


def homogenize(inst) -> SphericalInstance:
    """Lift ``a_i^T x >= b_i`` to the spherical constraints ``(a_i, -b_i)^T x >= 0``."""
    a = np.column_stack([np.asarray(inst.normals, float), -np.asarray(inst.offsets, float)])
    norms = np.linalg.norm(a, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroConstraintError(int(zero[0]))
    return SphericalInstance(a / norms[:, None], HomogenizationMeta(dim=a.shape[1] - 1))


def homogenize_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return normalize(np.append(x, 1.0))


def dehomogenize(x, tau_pole=TAU_POLE) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x[-1] <= tau_pole:
        raise AtInfinityError(f"last coordinate {x[-1]!r} is not positive")
    return x[:-1] / x[-1]


def violation(inst, x):
    """Return ``(v, i)``: the violation max(0, max_i -a_i^T x) and a most violated index.

    Ties go to the lowest index.  When ``x`` is feasible the index of the
    smallest inner product is still reported.
    """
    normals = inst.normals if isinstance(inst, SphericalInstance) else np.asarray(inst)
    dots = normals @ np.asarray(x, dtype=float)
    i = int(np.argmin(dots))
    return max(0.0, -float(dots[i])), i


def in_information_set(a, x, v) -> bool:
    """Membership of ``a`` in {a : a^T x >= -v(x)}; every normal passes at every iterate."""
    return float(np.dot(a, x)) >= -v - 1e-12


@dataclass(frozen=True)
class TouchingSphere:
    center: np.ndarray
    radius: float
    barycentric: np.ndarray
    center_in_hull: bool
    deficiency: float
    points: np.ndarray = field(repr=False, default=None)


def touching_sphere(points: Sequence) -> TouchingSphere:
    """Sphere through ``points`` centered in their affine hull.

    For points on the unit sphere the center is the orthogonal projection of
    the origin onto the affine hull, so the deficiency is just ``|center|``.
    The computation works on the differences ``p_i - p_0``; this is
    independent of the column-update route the solver uses.
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    k = p.shape[0]
    if k == 1:
        c = p[0].copy()
        return TouchingSphere(c, 0.0, np.ones(1), True, float(np.linalg.norm(c)), p)
    diffs = (p[1:] - p[0]).T
    try:
        f = factorize(diffs)
    except RankDeficientError as exc:
        raise AffinelyDependentError("points are affinely dependent") from exc
    z, _ = f.least_squares(-p[0])
    mu = np.concatenate([[1.0 - z.sum()], z])
    c = p[0] + diffs @ z
    radius = float(np.mean(np.linalg.norm(p - c, axis=1)))
    in_hull = bool(np.all(mu >= -TAU_ZERO))
    return TouchingSphere(c, radius, mu, in_hull, float(np.linalg.norm(c)), p)


def is_nearly_positively_spanning(points):
    """``(flag, deficiency)``: is the origin's projection on aff(points) in conv(points)?"""
    ts = touching_sphere(points)
    return ts.center_in_hull, ts.deficiency


def is_positively_spanning(points) -> bool:
    ts = touching_sphere(points)
    return ts.center_in_hull and ts.deficiency <= TAU_ZERO


def vertex_diameter(points):
    """Vertex diameter of the spherical simplex spanned by ``points``.

    The point opposite vertex i is the normalized barycentric combination of
    the remaining vertices, ``(C - mu_i a_i) / |C - mu_i a_i|``.  Returns
    ``(angle, witness_index)``.
    """
    ts = touching_sphere(points)
    if not ts.center_in_hull or np.any(ts.barycentric <= TAU_ZERO):
        raise PreconditionViolated("circumcenter must lie strictly inside the simplex")
    p = ts.points
    best, witness = -1.0, 0
    for i, mu_i in enumerate(ts.barycentric):
        opp = ts.center - mu_i * p[i]
        nrm = np.linalg.norm(opp)
        if nrm == 0.0:
            raise PreconditionViolated("degenerate opposite facet")
        ang = angle(p[i], opp / nrm)
        if ang > best + 1e-15:
            best, witness = ang, i
    return best, witness


def regular_vertex_diameter(cos_r: float, d: int) -> float:
    """cos of the vertex diameter of a regular d-simplex with circumradius R'."""
    c2 = cos_r * cos_r
    return ((d + 1) * c2 - 1.0) / math.sqrt(1.0 + (d - 1) * (d + 1) * c2)


@dataclass(frozen=True)
class SantaloBounds:
    cos_lower: float
    cos_upper: float


def santalo_bounds(cos_r: float, d: int) -> SantaloBounds:
    """Bounds on cos D for a set on S^d with spherical circumradius R'."""
    if not 0.0 <= cos_r <= 1.0:
        raise ValueError("cos_r must lie in [0, 1]")
    c2 = cos_r * cos_r
    lower = 2.0 * c2 - 1.0
    num = (d + 1) * c2 - 1.0
    if cos_r >= 1.0 / math.sqrt(d + 1):
        upper = num / d
    elif d % 2 == 1:
        upper = num / (1.0 + (d + 1) * c2)
    else:
        upper = num / (
            math.sqrt(1.0 + (d + 1) * c2) * math.sqrt(1.0 + (d + 1) * (d - 2) / (d + 2) * c2)
        )
    return SantaloBounds(lower, upper)


def zone_width_bound(cos_r: float, d: int) -> float:
    """Upper bound on sin(phi), the half-width of the zone holding the feasible set."""
    return min(1.0, (d + 1) * cos_r)


def beta_d(d: int) -> float:
    """Deficiency scale at which the polynomial variant transforms."""
    return math.sqrt(((4.0 / 3.0) ** (2.0 / (d + 2)) - 1.0) / 3.0)


def psi_alpha(x, alpha: float, pole) -> np.ndarray:
    """Stretch the ``pole`` component of ``x`` by ``alpha`` and renormalize."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    x = np.asarray(x, dtype=float)
    pole = np.asarray(pole, dtype=float)
    beta = float(pole @ x)
    return normalize(x + (alpha - 1.0) * beta * pole)


def psi_alpha_rows(xs, alpha: float, pole) -> np.ndarray:
    """:func:`psi_alpha` applied to every row of ``xs``."""
    xs = np.asarray(xs, dtype=float)
    y = xs + (alpha - 1.0) * np.outer(xs @ pole, pole)
    return y / np.linalg.norm(y, axis=1)[:, None]


def local_volume_factor(beta: float, alpha: float, d: int) -> float:
    return alpha / (1.0 + beta * beta * (alpha * alpha - 1.0)) ** ((d + 1) / 2.0)
