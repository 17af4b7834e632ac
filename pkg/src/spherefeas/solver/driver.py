"""Main loops of the four relaxation variants."""

from __future__ import annotations

import math
import time
from typing import Optional

import numpy as np

from ..sphere import AtInfinityError, SphericalInstance, beta_d, dehomogenize, homogenize
from .outcome import (
    ConfigError, IterRecord, IterTrace, NumericalBreakdown, PositiveSpanCertificate,
    Rule, SolveConfig, SolveOutcome, Status, Variant,
)
from .steps import ActiveSet, DegenerateRatioTest, segment_parameter, step_drop, step_expand
from .transforms import (
    EmptyReduction, estimate_size_L, lift_reduced_certificate, polynomial_budget,
    positive_null_vector, reduce_degenerate, rescale_violation, transform_polynomial,
)

CIRCUM_TOL = 1e-9
SUPPORT_RTOL = 1e-9


class _Spanning(Exception):
    """Raised inside the loop when the active set plus a_m positively spans."""

    def __init__(self, indices):
        self.indices = list(indices)


class _Feasible(Exception):
    def __init__(self, y):
        self.y = y


class _Budget(Exception):
    pass


class _VolumeBound(Exception):
    pass


def _pick(dots, rule, tol):
    """Index of the constraint to add and the violation of ``dots`` (unit iterate)."""
    i = int(np.argmin(dots))
    v = max(0.0, -float(dots[i]))
    if rule is Rule.FIRST_VIOLATED and v > tol:
        i = int(np.flatnonzero(dots < -tol)[0])
    return i, v


class _Run:
    """Mutable state of one run over the working normals."""

    def __init__(self, normals, cfg: SolveConfig, trace: IterTrace, start: int = 0):
        self.start = start
        self.W0 = normals
        self.W = normals.copy()
        self.D = normals.shape[1]
        self.d = self.D - 1
        self.cfg = cfg
        self.rule = cfg.rule_for()
        self.trace = trace
        self.N = np.eye(self.D)
        self.monotone = cfg.variant in (Variant.MONOTONE, Variant.POLYNOMIAL)
        self.rescale = cfg.variant is Variant.RESCALED and self.d >= 3
        self.trigger = cfg.trigger_for(self.d) if self.rescale else 0.0
        self.max_iters = cfg.max_iters_for(max(self.d, 1))
        self.poly = None
        if cfg.variant is Variant.POLYNOMIAL:
            L = cfg.poly_L
            if L is None:
                L, _ = estimate_size_L(normals)
            self.poly = polynomial_budget(max(self.d, 1), L)
            if cfg.max_iters is None:
                self.max_iters = self.poly[0] * (self.poly[1] + 1) + self.poly[1]
            self.poly_trigger = beta_d(max(self.d, 1)) / (self.d + 1)

    # -- bookkeeping ---------------------------------------------------------

    def _apply_map(self, M):
        self.N = self.N @ M
        self.N /= np.linalg.norm(self.N, 2)

    def _event(self, state, name, value):
        self.trace.append(IterRecord(
            self.trace.iterations, state.size, state.deficiency, float("nan"), -1,
            event=name, event_value=float(value),
        ))

    def _checked(self, state: ActiveSet) -> ActiveSet:
        scale = max(1.0, state.deficiency)
        if state.equal_products_error() <= CIRCUM_TOL * scale:
            return state
        state = state.rebuilt()
        if state.equal_products_error() > CIRCUM_TOL * scale or not state.center_in_hull:
            raise NumericalBreakdown(self.trace.iterations, "circumcenter property lost")
        return state

    # -- one expansion ---------------------------------------------------------

    def _expand(self, state: ActiveSet, m: int):
        """Expansion and drop loop: returns the accepted state and the list of leaving indices."""
        left = []
        x = state.center
        if self.monotone:
            t = segment_parameter(x, self.W[m])
            y = np.append((1.0 - t) * state.mu, t)
        else:
            y = np.append(state.mu, 0.0)
        entering: Optional[int] = m
        for _ in range(self.D + 2):
            e = step_expand(state, entering)
            if e.kind == "accepted":
                return e.state, left
            if e.kind == "spanning":
                raise _Spanning(e.indices)
            try:
                new_state, entering, y = step_drop(state, entering, y, e.coef)
            except DegenerateRatioTest as exc:
                raise NumericalBreakdown(self.trace.iterations, str(exc)) from None
            gone = [j for j in state.indices if j not in new_state.indices]
            left.extend(gone if gone else [m])
            state = new_state
        raise NumericalBreakdown(self.trace.iterations, "drop loop did not terminate")

    # -- main loop ---------------------------------------------------------------

    def run(self):
        tol = self.cfg.feas_tol
        state = ActiveSet.start(self.W, self.start)
        entered, left = self.start, ()
        since_restart = 0
        while True:
            self.trace.iterations += 1
            x = state.center
            u = x / np.linalg.norm(x)
            dots = self.W @ u
            m, v = _pick(dots, self.rule, tol)
            if self.rescale and tol < v <= self.trigger:
                r = int(np.argmin(dots))
                self.W, state, lam = rescale_violation(self.W, state, x, r, self.trigger, self.d)
                state = self._checked(state)
                self._apply_map(np.eye(self.D) + lam * np.outer(u, u))
                self.trace.rescalings += 1
                self._event(state, "rescale", lam)
                x = state.center
                u = x / np.linalg.norm(x)
                dots = self.W @ u
                m, v = _pick(dots, self.rule, tol)
            self.trace.append(IterRecord(
                self.trace.iterations, state.size, state.deficiency, v, m, entered, tuple(left),
            ))
            if self.cfg.record_iterates:
                self.trace.iterates.append(u.copy())
            if v <= tol:
                raise _Feasible(u)
            if self.trace.expansions >= self.max_iters:
                raise _Budget()
            if self.poly is not None and since_restart >= self.poly[1]:
                self.trace.inner_budget_exceeded = True
            self.trace.expansions += 1
            since_restart += 1
            try:
                state, left = self._expand(state, m)
            except ArithmeticError:
                state = state.rebuilt()
                state, left = self._expand(state, m)
            state = self._checked(state)
            entered = m
            if (self.poly is not None and state.size >= 2
                    and state.deficiency < self.poly_trigger):
                if self.trace.rescalings >= self.poly[0]:
                    raise _VolumeBound()
                pole_before = None
                try:
                    self.W, pole_idx = transform_polynomial(self.W, state)
                except Exception as exc:  # precondition can fail on a simplex with a zero weight
                    raise NumericalBreakdown(self.trace.iterations, f"transform failed: {exc}") from None
                pole_before = state.normals[pole_idx]
                self._apply_map(np.eye(self.D) - 0.5 * np.outer(pole_before, pole_before))
                self.trace.rescalings += 1
                self._event(state, "transform", pole_idx)
                state = ActiveSet.start(self.W, self.start)
                entered, left = self.start, ()
                since_restart = 0

    def original_point(self, y):
        x = self.N @ y
        return x / np.linalg.norm(x)


def _certificate(normals, indices) -> Optional[PositiveSpanCertificate]:
    indices = sorted(indices)
    w = positive_null_vector(normals[indices].T)
    if w is None:
        return None
    cert = PositiveSpanCertificate(tuple(int(i) for i in indices), w)
    return cert


def _support(normals, indices):
    """Indices of the positive dependency among ``normals[indices]`` with nonzero weight."""
    indices = sorted(indices)
    w = positive_null_vector(normals[indices].T)
    if w is None:
        return None
    return [j for j, wj in zip(indices, w) if wj > SUPPORT_RTOL * w.max()]


def _euclid(inst: SphericalInstance, point, trace):
    if inst.origin_meta is None:
        return None, ""
    try:
        return dehomogenize(point), ""
    except AtInfinityError as exc:
        return None, str(exc)


def _solve_normals(normals, cfg: SolveConfig, trace: IterTrace) -> SolveOutcome:
    run = _Run(normals, cfg, trace)
    D = normals.shape[1]
    try:
        run.run()
    except _Feasible as f:
        x = run.original_point(f.y)
        v = max(0.0, -float(np.min(normals @ x)))
        if v > cfg.feas_tol:
            return SolveOutcome(Status.BUDGET_EXHAUSTED, trace,
                                message=f"mapped point violates by {v:.3g}")
        return SolveOutcome(Status.FEASIBLE, trace, point=x)
    except _Budget:
        return SolveOutcome(Status.BUDGET_EXHAUSTED, trace, message="iteration budget exhausted")
    except _VolumeBound:
        return SolveOutcome(Status.INFEASIBLE, trace, message="volume bound: transform budget exhausted")
    except _Spanning as sp:
        support = _support(normals, sp.indices)
        if support is None:
            raise NumericalBreakdown(trace.iterations, "positive dependency not recovered") from None
        if len(support) == D + 1:
            cert = _certificate(normals, support)
            if cert is None or not cert.verify(normals):
                raise NumericalBreakdown(trace.iterations, "certificate failed to verify")
            return SolveOutcome(Status.INFEASIBLE, trace, certificate=cert)
        return _degenerate(normals, support, cfg, trace)
    raise AssertionError("unreachable")


def _degenerate(normals, support, cfg, trace) -> SolveOutcome:
    try:
        red = reduce_degenerate(normals, support)
    except EmptyReduction:
        raise NumericalBreakdown(trace.iterations, "degenerate set spans the whole space") from None
    eq = tuple(sorted(set(support) | set(red.equalities)))
    sub_trace = IterTrace()
    sub = _solve_normals(red.instance.normals, cfg, sub_trace)
    out = SolveOutcome(Status.DEGENERATE, trace, equality_indices=eq, reduced=sub)
    res = sub.status if sub.status is not Status.DEGENERATE else (
        Status.FEASIBLE if sub.feasible else Status.INFEASIBLE if sub.feasible is False else None)
    if res is Status.FEASIBLE:
        x = red.lift(sub.point)
        out.point = x / np.linalg.norm(x)
    elif res is Status.INFEASIBLE and sub.certificate is not None:
        idx, mu = lift_reduced_certificate(
            normals, support, red, sub.certificate.indices, sub.certificate.coefficients)
        cert = PositiveSpanCertificate(idx, mu)
        if not cert.verify(normals):
            raise NumericalBreakdown(trace.iterations, "lifted certificate failed to verify")
        out.certificate = cert
    return out


def solve(inst: SphericalInstance, cfg: Optional[SolveConfig] = None) -> SolveOutcome:
    """Decide the spherical feasibility problem ``a_i^T x >= 0`` on the unit sphere.

    Certificates, points and traces refer to ``inst.working_normals()``; when
    the instance came from homogenization the last index is the pole
    constraint ``x_{d+1} >= 0``.
    """
    if cfg is None:
        cfg = SolveConfig()
    if not isinstance(cfg, SolveConfig):
        raise ConfigError("cfg must be a SolveConfig")
    normals = np.array(inst.working_normals(), dtype=float)
    trace = IterTrace()
    t0 = time.perf_counter()
    out = _solve_normals(normals, cfg, trace)
    trace.wall_time = time.perf_counter() - t0
    if out.point is not None:
        out.euclidean_point, msg = _euclid(inst, out.point, trace)
        if msg:
            out.message = msg
    return out


def solve_euclidean(inst, cfg: Optional[SolveConfig] = None) -> SolveOutcome:
    """Homogenize a Euclidean instance ``a_i^T x >= b_i`` and solve it."""
    return solve(homogenize(inst), cfg)


def total_iterations(out: SolveOutcome) -> int:
    """Iterations including any recursive reduced solves."""
    n = out.trace.iterations
    if out.reduced is not None:
        n += total_iterations(out.reduced)
    return n


def total_rescalings(out: SolveOutcome) -> int:
    n = out.trace.rescalings
    if out.reduced is not None:
        n += total_rescalings(out.reduced)
    return n


__all__ = ["solve", "solve_euclidean", "total_iterations", "total_rescalings"]
