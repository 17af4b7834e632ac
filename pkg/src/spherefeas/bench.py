"""Benchmark matrices over the generated families and power-law fits of step counts."""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .baseline import simplex_feasibility
from .problems import FAMILIES, generate
from .solver import SolveConfig, solve_euclidean, total_iterations, total_rescalings

ALGORITHMS = ("simplex", "combinatorial", "monotone", "polynomial", "rescaled")
CSV_HEADER = ("family", "d", "n", "seed", "alg", "status", "steps", "rescalings", "ms")


class BenchSpecError(ValueError):
    pass


class NonPositiveData(ValueError):
    pass


@dataclass(frozen=True)
class BenchSpec:
    """A benchmark matrix.

    ``n_rule`` is either ``("factor", k)`` for ``n = k d`` or
    ``("fixed", [n1, n2, ...])``.  Seeds run from ``first_seed`` upwards.
    """

    families: Tuple[str, ...]
    dims: Tuple[int, ...]
    n_rule: Tuple[str, object] = ("factor", 8)
    seeds_per_cell: int = 5
    algorithms: Tuple[str, ...] = ALGORITHMS
    first_seed: int = 1

    def __post_init__(self):
        if not self.families or not self.dims or not self.algorithms:
            raise BenchSpecError("families, dims and algorithms must be nonempty")
        bad = [f for f in self.families if f not in FAMILIES]
        if bad:
            raise BenchSpecError(f"unknown families {bad}")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise BenchSpecError(f"unknown algorithms {bad}")
        if self.seeds_per_cell < 1:
            raise BenchSpecError("seeds_per_cell must be >= 1")
        if any(d < 1 for d in self.dims):
            raise BenchSpecError("dimensions must be positive")
        kind, val = self.n_rule
        if kind == "factor":
            if not val or int(val) < 1:
                raise BenchSpecError("n factor must be >= 1")
        elif kind == "fixed":
            if not val:
                raise BenchSpecError("fixed n list must be nonempty")
        else:
            raise BenchSpecError(f"unknown n rule {kind!r}")

    def cells(self) -> List[Tuple[str, int, int]]:
        kind, val = self.n_rule
        out = []
        for fam in self.families:
            for d in self.dims:
                ns = [int(val) * d] if kind == "factor" else [int(v) for v in val]
                out.extend((fam, d, n) for n in ns)
        return out


@dataclass
class BenchRow:
    family: str
    d: int
    n: int
    seed: object
    alg: str
    status: str
    steps: float
    rescalings: float
    ms: float

    def as_tuple(self):
        return (self.family, self.d, self.n, self.seed, self.alg, self.status,
                self.steps, self.rescalings, self.ms)


def run_one(family: str, d: int, n: int, seed: int, alg: str) -> BenchRow:
    """Generate one instance and run one algorithm on it; errors become the status."""
    t0 = time.perf_counter()
    try:
        inst = generate(family, d, n, seed)
        if alg == "simplex":
            res = simplex_feasibility(inst)
            status, steps, resc = res.status, res.pivots, 0
        else:
            out = solve_euclidean(inst, SolveConfig(alg))
            status, steps, resc = out.resolved_status, total_iterations(out), total_rescalings(out)
    except Exception as exc:  # recorded per row, the matrix carries on
        status, steps, resc = f"error:{type(exc).__name__}", float("nan"), float("nan")
    ms = 1000.0 * (time.perf_counter() - t0)
    return BenchRow(family, d, n, seed, alg, status, steps, resc, ms)


def thread_count() -> int:
    env = os.environ.get("FEAS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def run_bench(spec: BenchSpec, threads: int = None) -> List[BenchRow]:
    """All runs of ``spec`` followed by one ``seed="mean"`` row per (cell, algorithm)."""
    jobs = [
        (fam, d, n, spec.first_seed + k, alg)
        for fam, d, n in spec.cells()
        for k in range(spec.seeds_per_cell)
        for alg in spec.algorithms
    ]
    threads = threads or thread_count()
    if threads == 1:
        rows = [run_one(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda j: run_one(*j), jobs))
    alg_order = {a: i for i, a in enumerate(ALGORITHMS)}
    rows.sort(key=lambda r: (r.family, r.d, r.n, r.seed, alg_order[r.alg]))
    return rows + mean_rows(rows)


def mean_rows(rows: Sequence[BenchRow]) -> List[BenchRow]:
    groups: Dict[tuple, List[BenchRow]] = {}
    for r in rows:
        if r.seed != "mean":
            groups.setdefault((r.family, r.d, r.n, r.alg), []).append(r)
    alg_order = {a: i for i, a in enumerate(ALGORITHMS)}
    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], alg_order.get(k[3], 99))):
        g = groups[key]
        statuses = {r.status for r in g}
        status = statuses.pop() if len(statuses) == 1 else "mixed"
        out.append(BenchRow(
            *key[:3], "mean", key[3], status,
            float(np.mean([r.steps for r in g])),
            float(np.mean([r.rescalings for r in g])),
            float(np.mean([r.ms for r in g])),
        ))
    return out


def write_csv(rows: Sequence[BenchRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.as_tuple())


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(fh) -> List[BenchRow]:
    reader = csv.reader(fh)
    header = tuple(next(reader))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected header {header}")
    rows = []
    for rec in reader:
        fam, d, n, seed, alg, status, steps, resc, ms = rec
        seed = seed if seed == "mean" else int(seed)
        rows.append(BenchRow(fam, int(d), int(n), seed, alg, status,
                             float(steps), float(resc), float(ms)))
    return rows


def format_table(rows: Sequence[BenchRow]) -> str:
    """Mean steps per cell, one decimal, with the rescaling count after the rescaled column."""
    means = [r for r in rows if r.seed == "mean"]
    algs = [a for a in ALGORITHMS if any(r.alg == a for r in means)]
    head = ["family", "d", "n"] + algs + (["resc."] if "rescaled" in algs else [])
    cells: Dict[tuple, Dict[str, BenchRow]] = {}
    for r in means:
        cells.setdefault((r.family, r.d, r.n), {})[r.alg] = r
    lines = ["\t".join(head)]
    for key in sorted(cells):
        c = cells[key]
        vals = [key[0], str(key[1]), str(key[2])]
        vals += [f"{c[a].steps:.1f}" if a in c else "-" for a in algs]
        if "rescaled" in algs:
            vals.append(f"{c['rescaled'].rescalings:.1f}" if "rescaled" in c else "-")
        lines.append("\t".join(vals))
    return "\n".join(lines)


@dataclass(frozen=True)
class FitResult:
    alpha: float
    beta: float
    residual: float


def fit_power_law(points) -> FitResult:
    """Least-squares fit of ``log steps = log alpha + beta log d``; residual is RMS in log space."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (d, steps) points")
    if np.any(~(pts > 0)):
        raise NonPositiveData("all d and step values must be positive")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(x) == 0:
        raise ValueError("need at least two distinct dimensions")
    beta, log_alpha = np.polyfit(x, y, 1)
    resid = y - (log_alpha + beta * x)
    return FitResult(float(math.exp(log_alpha)), float(beta), float(np.sqrt(np.mean(resid ** 2))))


def fits_from_rows(rows: Sequence[BenchRow]) -> Dict[Tuple[str, str], FitResult]:
    """Fit each (family, algorithm) series of mean rows against d; simplex also with the d init pivots."""
    series: Dict[Tuple[str, str], list] = {}
    for r in rows:
        if r.seed != "mean" or not (r.steps > 0):
            continue
        series.setdefault((r.family, r.alg), []).append((r.d, r.steps))
        if r.alg == "simplex":
            series.setdefault((r.family, "simplex_init"), []).append((r.d, r.steps + r.d))
    out = {}
    for key, pts in sorted(series.items()):
        if len({p[0] for p in pts}) >= 2:
            out[key] = fit_power_law(pts)
    return out


__all__ = [
    "ALGORITHMS", "CSV_HEADER", "BenchRow", "BenchSpec", "BenchSpecError", "FitResult",
    "NonPositiveData", "fit_power_law", "fits_from_rows", "format_table", "mean_rows",
    "read_csv", "rows_to_csv", "run_bench", "run_one", "thread_count", "write_csv",
]
