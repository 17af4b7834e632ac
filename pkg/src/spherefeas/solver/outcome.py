"""Configuration, traces and results of a solver run."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np


class Variant(str, enum.Enum):
    COMBINATORIAL = "combinatorial"
    MONOTONE = "monotone"
    POLYNOMIAL = "polynomial"
    RESCALED = "rescaled"


class Rule(str, enum.Enum):
    MOST_VIOLATED = "most_violated"
    FIRST_VIOLATED = "first_violated"


class Status(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    DEGENERATE = "degenerate"
    BUDGET_EXHAUSTED = "budget"


class ConfigError(ValueError):
    pass


class NumericalBreakdown(RuntimeError):
    def __init__(self, iteration, msg):
        self.iteration = iteration
        super().__init__(f"iteration {iteration}: {msg}")


@dataclass(frozen=True)
class SolveConfig:
    """Solver settings.

    ``None`` fields resolve per instance: ``max_iters`` to ``10 d^2``
    expansion steps, ``constraint_rule`` to first-violated for the
    polynomial variant and most-violated otherwise, ``rescale_trigger`` to
    ``1/sqrt(d)`` and ``poly_L`` to the estimate of
    :func:`spherefeas.solver.transforms.estimate_size_L`.  With
    ``record_iterates`` the trace keeps every unit iterate (in the working
    coordinates of that moment).
    """

    variant: Variant = Variant.COMBINATORIAL
    feas_tol: float = 1e-9
    max_iters: Optional[int] = None
    constraint_rule: Optional[Rule] = None
    poly_L: Optional[int] = None
    rescale_trigger: Optional[float] = None
    seed: int = 0
    record_iterates: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "variant", Variant(self.variant))
            if self.constraint_rule is not None:
                object.__setattr__(self, "constraint_rule", Rule(self.constraint_rule))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.feas_tol > 0:
            raise ConfigError("feas_tol must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.poly_L is not None and self.poly_L < 1:
            raise ConfigError("poly_L must be >= 1")

    def rule_for(self) -> Rule:
        if self.constraint_rule is not None:
            return self.constraint_rule
        if self.variant is Variant.POLYNOMIAL:
            return Rule.FIRST_VIOLATED
        return Rule.MOST_VIOLATED

    def max_iters_for(self, d: int) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return max(10 * d * d, 10)

    def trigger_for(self, d: int) -> float:
        if self.rescale_trigger is not None:
            return self.rescale_trigger
        return 1.0 / math.sqrt(d)


@dataclass
class IterRecord:
    iteration: int
    size: int
    deficiency: float
    violation: float
    violated: int
    entered: Optional[int] = None
    left: Tuple[int, ...] = ()
    event: str = ""
    event_value: float = float("nan")


TRACE_HEADER = (
    "iter", "size", "deficiency", "violation", "violated",
    "entered", "left", "event", "event_value",
)


@dataclass
class IterTrace:
    records: List[IterRecord] = field(default_factory=list)
    iterations: int = 0
    expansions: int = 0
    rescalings: int = 0
    wall_time: float = 0.0
    inner_budget_exceeded: bool = False
    iterates: List[np.ndarray] = field(default_factory=list)

    def append(self, rec: IterRecord) -> None:
        self.records.append(rec)

    def deficiencies(self) -> np.ndarray:
        return np.array([r.deficiency for r in self.records if not r.event])

    def rows(self):
        for r in self.records:
            yield (
                r.iteration, r.size, repr(r.deficiency), repr(r.violation), r.violated,
                "" if r.entered is None else r.entered,
                ";".join(str(j) for j in r.left), r.event,
                "" if math.isnan(r.event_value) else repr(r.event_value),
            )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_HEADER)
            w.writerows(self.rows())


@dataclass(frozen=True)
class PositiveSpanCertificate:
    """Nonnegative weights, summing to one, that combine the indexed normals to zero."""

    indices: Tuple[int, ...]
    coefficients: np.ndarray

    def residual(self, normals) -> float:
        normals = np.asarray(normals)
        return float(np.linalg.norm(self.coefficients @ normals[list(self.indices)]))

    def verify(self, normals, tol=1e-8) -> bool:
        mu = self.coefficients
        return (
            len(self.indices) == len(mu)
            and len(set(self.indices)) == len(self.indices)
            and bool(np.all(mu >= 0.0))
            and abs(float(mu.sum()) - 1.0) <= tol
            and self.residual(normals) <= tol
        )


@dataclass
class SolveOutcome:
    status: Status
    trace: IterTrace
    point: Optional[np.ndarray] = None
    euclidean_point: Optional[np.ndarray] = None
    certificate: Optional[PositiveSpanCertificate] = None
    equality_indices: Tuple[int, ...] = ()
    reduced: Optional["SolveOutcome"] = None
    message: str = ""

    @property
    def feasible(self) -> Optional[bool]:
        """True/False when decided, None when the budget ran out."""
        if self.status is Status.FEASIBLE:
            return True
        if self.status is Status.INFEASIBLE:
            return False
        if self.status is Status.DEGENERATE:
            return self.reduced.feasible if self.reduced is not None else None
        return None

    @property
    def resolved_status(self) -> str:
        f = self.feasible
        if f is None:
            return Status.BUDGET_EXHAUSTED.value
        return Status.FEASIBLE.value if f else Status.INFEASIBLE.value
