"""Relaxation solvers for the spherical feasibility problem."""

from .driver import solve, solve_euclidean, total_iterations, total_rescalings
from .outcome import (
    TRACE_HEADER, ConfigError, IterRecord, IterTrace, NumericalBreakdown,
    PositiveSpanCertificate, Rule, SolveConfig, SolveOutcome, Status, Variant,
)
from .steps import (
    ActiveSet, DegenerateRatioTest, Expansion, circumcenter, monotone_y, ratio_test,
    step_drop, step_expand,
)
from .transforms import (
    EmptyReduction, PreconditionViolated, ReducedInstance, TriggerNotMet, Unsolvable,
    eq17_fixture, estimate_size_L, reduce_degenerate, slow_progress_instance, rescale_lambda,
    rescale_violation, transform_polynomial,
)

__all__ = [
    "TRACE_HEADER", "ActiveSet", "ConfigError", "DegenerateRatioTest", "EmptyReduction",
    "Expansion", "IterRecord", "IterTrace", "NumericalBreakdown", "PositiveSpanCertificate",
    "PreconditionViolated", "ReducedInstance", "Rule", "SolveConfig", "SolveOutcome", "Status",
    "TriggerNotMet", "Unsolvable", "Variant", "circumcenter", "eq17_fixture", "estimate_size_L",
    "monotone_y", "ratio_test", "reduce_degenerate", "slow_progress_instance", "rescale_lambda",
    "rescale_violation", "solve", "solve_euclidean", "step_drop", "step_expand",
    "total_iterations", "total_rescalings", "transform_polynomial",
]
