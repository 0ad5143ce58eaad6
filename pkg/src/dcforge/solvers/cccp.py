"""CCCP and its DC-constrained generalization CCCP+."""

from __future__ import annotations

import logging
import time

import numpy as np

from ..errors import HasConstraints
from ..problems.dc import DCProblem
from ..problems.functions import combine
from .config import SolveConfig
from .inner import inner_convex_solve
from .trace import IterateTrace

log = logging.getLogger(__name__)


def cccp_solve(p: DCProblem, config: SolveConfig = SolveConfig()) -> IterateTrace:
    """``x_{k+1} = argmin_x f(x) - <grad g(x_k), x>`` over the domain."""
    if p.constraints:
        raise HasConstraints("cccp_solve takes problems without DC constraints; use cccp_plus_solve")
    x = p.x_init.copy()
    trace = IterateTrace("cccp", [x.copy()], meta={"phi1": float(p.objective(x))})
    whole = p.domain.kind == "whole_space"
    for k in range(1, config.max_outer_iters + 1):
        t0 = time.perf_counter()
        v = p.g.grad(x)
        surrogate = combine([(1.0, p.f)], linear=-v, name="Q(.;x_k)")
        rep = inner_convex_solve(surrogate, p.domain, (), config, x0=x).require()
        xn = rep.x_star
        gap = p.dc_gap(x, xn)
        obj = float(p.objective(x))
        kkt = float(np.linalg.norm(p.f.grad(xn) - v)) if whole else None
        x = xn
        trace.iterates.append(x.copy())
        trace.add_row(
            objective=obj,
            dc_gap=gap,
            step=1.0,
            inner_iters=rep.iterations,
            kkt=kkt,
            wall_ms=1e3 * (time.perf_counter() - t0),
            inner_residual=rep.residual,
        )
        log.debug("cccp k=%d F=%.6g gap=%.3e", k, obj, gap)
        if config.gap_tol > 0 and gap <= config.gap_tol:
            trace.stopped = "gap_tol"
            return trace
    trace.stopped = "max_iters"
    return trace


def linearized_constraints(p: DCProblem, x: np.ndarray):
    """``f_i(y) - g_i(x) - <grad g_i(x), y - x> <= 0`` as smooth convex functions of ``y``."""
    out = []
    for i, (fi, gi) in enumerate(p.constraints):
        v = gi.grad(x)
        out.append(combine([(1.0, fi)], linear=-v, const=float(v @ x) - float(gi(x)), name=f"c{i + 1}(.;x_k)"))
    return out


def cccp_plus_solve(p: DCProblem, config: SolveConfig = SolveConfig()) -> IterateTrace:
    """CCCP with the concave parts of the DC constraints linearized as well.

    Without constraints this is exactly :func:`cccp_solve`.
    """
    if not p.constraints:
        return cccp_solve(p, config)
    x = p.x_init.copy()
    trace = IterateTrace("cccp_plus", [x.copy()], meta={"phi1": float(p.objective(x))})
    for k in range(1, config.max_outer_iters + 1):
        t0 = time.perf_counter()
        v = p.g.grad(x)
        surrogate = combine([(1.0, p.f)], linear=-v, name="Q(.;x_k)")
        cons = linearized_constraints(p, x)
        rep = inner_convex_solve(surrogate, p.domain, (), config, convex_constraints=cons, x0=x).require()
        xn = rep.x_star
        gap = p.dc_gap(x, xn)
        obj = float(p.objective(x))
        feas = float(np.max(p.constraint_values(x)))
        x = xn
        trace.iterates.append(x.copy())
        trace.add_row(
            objective=obj,
            dc_gap=gap,
            step=1.0,
            inner_iters=rep.iterations,
            feas=feas,
            wall_ms=1e3 * (time.perf_counter() - t0),
            inner_residual=rep.residual,
        )
        log.debug("cccp+ k=%d F=%.6g gap=%.3e feas=%.3e", k, obj, gap, feas)
        if config.gap_tol > 0 and gap <= config.gap_tol:
            trace.stopped = "gap_tol"
            return trace
    trace.stopped = "max_iters"
    return trace
