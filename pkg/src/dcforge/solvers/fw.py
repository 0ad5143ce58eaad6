"""Frank-Wolfe and the constraint-linearizing FW+ driver."""

from __future__ import annotations

import logging
import time
from typing import Sequence

import numpy as np

from ..errors import InfeasiblePoint, MixedCurvature
from ..problems.domains import Domain
from ..problems.functions import SmoothFn, affine
from .config import SolveConfig, StepRule
from .inner import inner_convex_solve
from .trace import IterateTrace

log = logging.getLogger(__name__)


def _is_lift(obj) -> bool:
    # duck-typed so that transforms can import the solvers without a cycle
    return hasattr(obj, "linear_minimize") and hasattr(obj, "embed")


def _lift_extras(lift, w, s) -> dict:
    """DC-side diagnostics of a lifted FW step from ``w`` towards ``s``."""
    p = lift.base
    x, _ = lift.extract(w)
    xs, _ = lift.extract(s)
    out = {"dc_gap": p.dc_gap(x, xs), "slackness": lift.slackness(w)}
    if lift.kind == "basic":
        out["kkt"] = float(np.linalg.norm(p.f.grad(xs) - p.g.grad(x)))
    return out


def _move(w, s, eta):
    # a unit step lands exactly on the subproblem solution
    return s.copy() if eta == 1.0 else (1.0 - eta) * w + eta * s


def fw_solve(
    phi: SmoothFn | None,
    feasible,
    config: SolveConfig = SolveConfig(),
    omega1=None,
    *,
    lmo_method: str = "reduced",
) -> IterateTrace:
    """Frank-Wolfe on a geometric domain (via its LMO) or on an epigraph lift.

    For a lift, ``phi`` defaults to the lifted objective and ``omega1`` to the
    embedded starting point of the base problem.
    """
    is_lift = _is_lift(feasible)
    if is_lift:
        phi = feasible.phi if phi is None else phi
        w = feasible.embed(feasible.base.x_init) if omega1 is None else np.asarray(omega1, dtype=float).copy()
        if not feasible.membership(w):
            raise InfeasiblePoint("omega1 is outside the lifted set")
    else:
        if feasible.kind == "whole_space":
            raise ValueError("whole_space has no LMO; lift the problem first")
        w = feasible.interior_point() if omega1 is None else np.asarray(omega1, dtype=float).copy()
        if not feasible.contains(w):
            raise InfeasiblePoint("omega1 is outside the domain")
    trace = IterateTrace("fw", [w.copy()], meta={"phi1": float(phi(w))})
    rule = config.step_rule
    for k in range(1, config.max_outer_iters + 1):
        t0 = time.perf_counter()
        grad = phi.grad(w)
        extras: dict = {}
        if is_lift:
            s, rep = feasible.linear_minimize(grad, (), config, x0=w, method=lmo_method)
            iters = rep.iterations
            extras = _lift_extras(feasible, w, s)
        else:
            s, iters = feasible.lmo(grad), 0
        gap = float(grad @ (w - s))
        eta = rule.step(k, phi, w, s)
        obj = float(phi(w))
        w = _move(w, s, eta)
        trace.iterates.append(w.copy())
        trace.add_row(
            objective=obj,
            fw_gap=gap,
            dc_gap=extras.pop("dc_gap", None),
            step=eta,
            inner_iters=iters,
            kkt=extras.pop("kkt", None),
            wall_ms=1e3 * (time.perf_counter() - t0),
            target=s,
            **extras,
        )
        log.debug("fw k=%d phi=%.6g gap=%.3e eta=%.3g", k, obj, gap, eta)
        if config.gap_tol > 0 and gap <= config.gap_tol:
            trace.stopped = "gap_tol"
            return trace
    trace.stopped = "max_iters"
    return trace


def curvature_mode(phi: SmoothFn, psis: Sequence[SmoothFn]) -> str:
    """``concave`` or ``convex``; anything else is out of scope."""
    fns = [phi, *psis]
    if all(f.is_concave for f in fns):
        return "concave"
    if all(f.is_convex for f in fns):
        return "convex"
    raise MixedCurvature("FW+ needs an all-concave or an all-convex objective/constraint family")


def fw_plus_solve(
    phi: SmoothFn | None,
    domain,
    psis: Sequence[SmoothFn] | None = None,
    config: SolveConfig = SolveConfig(),
    omega1=None,
    *,
    lmo_method: str = "reduced",
) -> IterateTrace:
    """FW with every constraint ``psi_i`` linearized at the current iterate.

    Concave mode takes unit steps and needs a feasible start; convex mode
    takes ``2/(k+1)`` steps and may start infeasible.
    """
    is_lift = _is_lift(domain)
    if is_lift:
        phi = domain.phi if phi is None else phi
        psis = domain.psis if psis is None else psis
        w = domain.embed(domain.base.x_init) if omega1 is None else np.asarray(omega1, dtype=float).copy()
        inside = domain.membership(w)
    else:
        psis = () if psis is None else psis
        w = domain.interior_point() if omega1 is None else np.asarray(omega1, dtype=float).copy()
        inside = domain.contains(w)
    psis = tuple(psis)
    mode = curvature_mode(phi, psis)
    if not inside:
        raise InfeasiblePoint("omega1 is outside the domain")
    if mode == "concave" and any(float(psi(w)) > 1e-9 for psi in psis):
        raise InfeasiblePoint("concave-mode FW+ needs psi_i(omega1) <= 0")
    rule = StepRule("unit") if mode == "concave" else StepRule("harmonic")
    trace = IterateTrace("fw_plus", [w.copy()], meta={"phi1": float(phi(w)), "mode": mode})
    for k in range(1, config.max_outer_iters + 1):
        t0 = time.perf_counter()
        grad = phi.grad(w)
        halfspaces = []
        for psi in psis:
            a = psi.grad(w)
            halfspaces.append((a, float(a @ w) - float(psi(w))))
        extras: dict = {}
        if is_lift:
            s, rep = domain.linear_minimize(grad, halfspaces, config, x0=w, method=lmo_method)
            extras = _lift_extras(domain, w, s)
        elif halfspaces:
            rep = inner_convex_solve(affine(grad), domain, halfspaces, config, x0=w).require()
            s = rep.x_star
        else:
            s, rep = domain.lmo(grad), None
        gap = float(grad @ (w - s))
        eta = rule.step(k)
        obj = float(phi(w))
        feas = max((float(psi(w)) for psi in psis), default=None)
        w = _move(w, s, eta)
        trace.iterates.append(w.copy())
        trace.add_row(
            objective=obj,
            fw_gap=gap,
            dc_gap=extras.pop("dc_gap", None),
            step=eta,
            inner_iters=0 if rep is None else rep.iterations,
            kkt=extras.pop("kkt", None),
            feas=feas,
            wall_ms=1e3 * (time.perf_counter() - t0),
            target=s,
            **extras,
        )
        log.debug("fw+ k=%d phi=%.6g gap=%.3e feas=%s", k, obj, gap, feas)
        if config.gap_tol > 0 and gap <= config.gap_tol:
            trace.stopped = "gap_tol"
            return trace
    trace.stopped = "max_iters"
    return trace
