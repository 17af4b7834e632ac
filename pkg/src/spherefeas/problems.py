"""Random Euclidean feasibility instances and their text file format.

Three families are generated:

``ex1``
    ``n`` random unit normals with negative offsets, so the origin is
    strictly feasible before translation.
``ex2``
    the first ``d`` normals random, ``a_{d+1} = -sum(a_i)/|sum(a_i)|`` and
    ``b_1 = ... = b_{d+1} = 0``; with probability one the origin is the only
    feasible point.  The remaining ``n-d-1`` constraints are drawn as in
    ``ex1``.
``ex3``
    ``ex2`` with ``b_{d+1} = 10``, which makes the system infeasible.

Every instance is finally translated by a random vector ``t`` with
coordinates uniform in [-1, 1].

Random numbers come from :class:`spherefeas.prng.Xoshiro256`.  The draw
order is: normals row by row (Gaussian, normalized), then offsets, then the
translation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .prng import Xoshiro256

FORMAT_TAG = "feas-v1"
OFFSET_LO, OFFSET_HI = -1.0, -1e-6
FAMILIES = ("ex1", "ex2", "ex3")


class ParseError(ValueError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class VersionMismatch(ValueError):
    pass


class DimensionTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class EuclideanInstance:
    """Constraints ``normals[i] @ x >= offsets[i]`` in R^d."""

    normals: np.ndarray
    offsets: np.ndarray
    family: str = "custom"
    seed: Optional[int] = None
    translation: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        a = np.array(self.normals, dtype=float)
        b = np.array(self.offsets, dtype=float).reshape(-1)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("normals must be an (n, d) array with n, d >= 1")
        if b.shape[0] != a.shape[0]:
            raise ValueError("one offset per constraint required")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("instance data must be finite")
        t = np.zeros(a.shape[1]) if self.translation is None else np.array(self.translation, float)
        if t.shape != (a.shape[1],):
            raise ValueError("translation must have d entries")
        for arr in (a, b, t):
            arr.setflags(write=False)
        object.__setattr__(self, "normals", a)
        object.__setattr__(self, "offsets", b)
        object.__setattr__(self, "translation", t)

    @property
    def d(self) -> int:
        return self.normals.shape[1]

    @property
    def n(self) -> int:
        return self.normals.shape[0]

    def slack(self, x) -> np.ndarray:
        return self.normals @ np.asarray(x, float) - self.offsets

    def is_feasible(self, x, tol=1e-9) -> bool:
        return bool(np.all(self.slack(x) >= -tol))


def translate(inst: EuclideanInstance, t) -> EuclideanInstance:
    """Shift the polyhedron by ``t``: x feasible for inst iff x + t feasible for the result."""
    t = np.asarray(t, dtype=float)
    if t.shape != (inst.d,):
        raise ValueError("translation must have d entries")
    return EuclideanInstance(
        inst.normals,
        inst.offsets + inst.normals @ t,
        inst.family,
        inst.seed,
        inst.translation + t,
    )


def _random_rows(rng, count, d):
    return [rng.unit_vector(d) for _ in range(count)]


def _finish(rng, rows, offsets, d, family, seed):
    t = [rng.uniform(-1.0, 1.0) for _ in range(d)]
    base = EuclideanInstance(np.array(rows), np.array(offsets), family, seed)
    return translate(base, np.array(t))


def gen_ex1(d: int, n: int, seed: int) -> EuclideanInstance:
    if d < 1 or n < 1:
        raise ValueError("need d >= 1 and n >= 1")
    rng = Xoshiro256(seed)
    rows = _random_rows(rng, n, d)
    offsets = [rng.uniform(OFFSET_LO, OFFSET_HI) for _ in range(n)]
    return _finish(rng, rows, offsets, d, "ex1", seed)


def _gen_single_point(d, n, seed, last_offset, family):
    if d < 1 or n < 1:
        raise ValueError("need d >= 1 and n >= 1")
    if n < d + 1:
        raise DimensionTooSmall(f"{family} needs n >= d+1 (got n={n}, d={d})")
    rng = Xoshiro256(seed)
    head = np.array(_random_rows(rng, d, d))
    s = head.sum(axis=0)
    rows = list(head) + [-s / np.linalg.norm(s)]
    rows += _random_rows(rng, n - d - 1, d)
    offsets = [0.0] * d + [last_offset]
    offsets += [rng.uniform(OFFSET_LO, OFFSET_HI) for _ in range(n - d - 1)]
    return _finish(rng, rows, offsets, d, family, seed)


def gen_ex2(d: int, n: int, seed: int) -> EuclideanInstance:
    return _gen_single_point(d, n, seed, 0.0, "ex2")


def gen_ex3(d: int, n: int, seed: int) -> EuclideanInstance:
    return _gen_single_point(d, n, seed, 10.0, "ex3")


GENERATORS = {"ex1": gen_ex1, "ex2": gen_ex2, "ex3": gen_ex3}


def generate(family: str, d: int, n: int, seed: int) -> EuclideanInstance:
    try:
        gen = GENERATORS[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}") from None
    return gen(d, n, seed)


# -- file format -----------------------------------------------------------
#
#   feas-v1 <d> <n> <family> <seed or ->
#   a_1 ... a_d b          (n lines)
#   translation t_1 ... t_d
#
# Floats are written with repr(), the shortest string that round-trips.
# Blank lines and lines starting with '#' are ignored.


def format_instance(inst: EuclideanInstance) -> str:
    seed = "-" if inst.seed is None else str(inst.seed)
    lines = [f"{FORMAT_TAG} {inst.d} {inst.n} {inst.family} {seed}"]
    for a, b in zip(inst.normals, inst.offsets):
        lines.append(" ".join(repr(float(v)) for v in (*a, b)))
    lines.append("translation " + " ".join(repr(float(v)) for v in inst.translation))
    return "\n".join(lines) + "\n"


def write_instance(inst: EuclideanInstance, path) -> None:
    Path(path).write_text(format_instance(inst))


def _floats(tokens, lineno):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ParseError(lineno, "malformed number") from None


def parse_instance(text: str) -> EuclideanInstance:
    lines = [
        (i, ln.strip())
        for i, ln in enumerate(text.splitlines(), start=1)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise ParseError(1, "empty file")
    lineno, header = lines[0]
    tok = header.split()
    if not tok or not tok[0].startswith("feas-"):
        raise ParseError(lineno, "missing feas header")
    if tok[0] != FORMAT_TAG:
        raise VersionMismatch(f"unsupported format {tok[0]!r}, expected {FORMAT_TAG}")
    if len(tok) != 5:
        raise ParseError(lineno, "header needs: tag d n family seed")
    try:
        d, n = int(tok[1]), int(tok[2])
    except ValueError:
        raise ParseError(lineno, "dimension and count must be integers") from None
    if d < 1:
        raise ParseError(lineno, "dimension must be >= 1")
    if n < 1:
        raise ParseError(lineno, "empty constraint list")
    family = tok[3]
    if tok[4] == "-":
        seed = None
    else:
        try:
            seed = int(tok[4])
        except ValueError:
            raise ParseError(lineno, "seed must be an integer or '-'") from None

    body = lines[1:]
    if len(body) < n:
        raise ParseError(body[-1][0] if body else lineno, f"expected {n} constraint lines")
    rows = []
    for lineno, ln in body[:n]:
        vals = _floats(ln.split(), lineno)
        if len(vals) != d + 1:
            raise ParseError(lineno, f"expected {d + 1} numbers, got {len(vals)}")
        rows.append(vals)
    rest = body[n:]
    translation = None
    if rest:
        lineno, ln = rest[0]
        tok = ln.split()
        if tok[0] != "translation":
            raise ParseError(lineno, "expected translation line")
        translation = _floats(tok[1:], lineno)
        if len(translation) != d:
            raise ParseError(lineno, f"translation needs {d} numbers")
        if len(rest) > 1:
            raise ParseError(rest[1][0], "trailing content")
    data = np.array(rows)
    try:
        return EuclideanInstance(data[:, :d], data[:, d], family, seed, translation)
    except ValueError as exc:
        raise ParseError(lineno, str(exc)) from None


def read_instance(path) -> EuclideanInstance:
    return parse_instance(Path(path).read_text())
