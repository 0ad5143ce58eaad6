"""Small dense convex solver used for every argmin inside the outer drivers.

Four routes, chosen from the problem structure:

* ``closed_form``: PD quadratic on the whole space, one Cholesky solve.
* ``newton``: other objectives on the whole space, damped Newton.
* ``pgd``: domain constraints only, projected gradient with backtracking.
* ``barrier``: any explicit constraints, primal-dual interior point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..errors import InfeasibleSubproblem
from ..problems.domains import Domain
from ..problems.functions import SmoothFn
from .config import InnerSolveReport, SolveConfig

log = logging.getLogger(__name__)

_EPS = np.finfo(float).eps
_PHASE1_TOL = 1e-9


def _finite(v) -> bool:
    return bool(np.all(np.isfinite(v)))


# ---------------------------------------------------------------------------
# unconstrained routes


def _closed_form(obj: SmoothFn, x0: np.ndarray) -> InnerSolveReport | None:
    H, c = obj.quad.H, obj.quad.c
    try:
        factor = cho_factor(H)
    except np.linalg.LinAlgError:
        return None
    x = -cho_solve(factor, c)
    # one refinement step keeps the residual at roundoff level
    x -= cho_solve(factor, H @ x + c)
    return InnerSolveReport(x, 1, float(np.linalg.norm(H @ x + c)), "converged", "closed_form")


def _newton(obj: SmoothFn, x0: np.ndarray, cfg: SolveConfig) -> InnerSolveReport:
    x = x0.copy()
    fx = float(obj(x))
    n = x.size
    for it in range(cfg.inner_max_iters):
        g = obj.grad(x)
        res = float(np.linalg.norm(g))
        if res <= cfg.eps_inner:
            return InnerSolveReport(x, it, res, "converged", "newton")
        H = obj.hessian(x)
        delta = 0.0
        scale = 1e-12 * (1.0 + np.linalg.norm(H, np.inf))
        while True:
            try:
                L = np.linalg.cholesky(H + delta * np.eye(n))
                break
            except np.linalg.LinAlgError:
                delta = scale if delta == 0 else 10 * delta
        if delta == 0 and np.min(np.diag(L)) ** 2 < scale:
            L = np.linalg.cholesky(H + scale * np.eye(n))
        d = -cho_solve((L, True), g)
        slope = float(g @ d)
        slack = 10 * _EPS * (1.0 + abs(fx))
        t = 1.0
        for _ in range(80):
            xn = x + t * d
            fn = float(obj(xn))
            if np.isfinite(fn) and fn <= fx + 1e-4 * t * slope + slack:
                break
            t *= 0.5
        else:
            return InnerSolveReport(x, it, res, "max_iters", "newton")
        x, fx = xn, fn
        if np.linalg.norm(x) > cfg.unbounded_norm_threshold:
            return InnerSolveReport(x, it + 1, res, "unbounded", "newton")
    res = float(np.linalg.norm(obj.grad(x)))
    status = "converged" if res <= cfg.eps_inner else "max_iters"
    return InnerSolveReport(x, cfg.inner_max_iters, res, status, "newton")


def _pgd(obj: SmoothFn, domain: Domain, x0: np.ndarray, cfg: SolveConfig) -> InnerSolveReport:
    x = domain.project(x0)
    fx = float(obj(x))
    # with a known L, 1/L always passes the descent test; letting t grow past it
    # makes the roundoff slack below admit overshooting steps near the optimum
    t_max = 1.0 / obj.lipschitz_grad if obj.lipschitz_grad else np.inf
    t = min(1.0, t_max)
    res = np.inf
    for it in range(cfg.inner_max_iters):
        g = obj.grad(x)
        res = float(np.linalg.norm(x - domain.project(x - g)))
        if res <= cfg.eps_inner:
            return InnerSolveReport(x, it, res, "converged", "pgd")
        slack = 10 * _EPS * (1.0 + abs(fx))
        for _ in range(80):
            xn = domain.project(x - t * g)
            d = xn - x
            fn = float(obj(xn))
            if np.isfinite(fn) and fn <= fx + g @ d + (d @ d) / (2 * t) + slack:
                break
            t *= 0.5
        else:
            return InnerSolveReport(x, it, res, "max_iters", "pgd")
        if np.array_equal(xn, x):
            # the step stalled at roundoff: the residual is as small as it gets
            return InnerSolveReport(x, it, res, "max_iters", "pgd")
        x, fx = xn, fn
        t = min(2.0 * t, t_max)
        if np.linalg.norm(x) > cfg.unbounded_norm_threshold:
            return InnerSolveReport(x, it + 1, res, "unbounded", "pgd")
    return InnerSolveReport(x, cfg.inner_max_iters, res, "max_iters", "pgd")


# ---------------------------------------------------------------------------
# primal-dual interior point


@dataclass
class _Constraints:
    """``G x <= h``, smooth convex ``c_j(x) <= 0`` and ``A x = b``."""

    G: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray
    smooth: list[SmoothFn] = field(default_factory=list)

    @property
    def n_ineq(self) -> int:
        return self.G.shape[0] + len(self.smooth)

    def values(self, x):
        return np.concatenate([self.G @ x - self.h, [float(c(x)) for c in self.smooth]])

    def jac(self, x):
        if not self.smooth:
            return self.G
        return np.vstack([self.G] + [c.grad(x)[None, :] for c in self.smooth])

    def weighted_hess(self, x, z):
        n = x.size
        out = np.zeros((n, n))
        zs = z[self.G.shape[0] :]
        for zj, c in zip(zs, self.smooth):
            out += zj * c.hessian(x)
        return out


def _kkt_residuals(obj, cons, x, s, z, y, mu):
    J = cons.jac(x)
    rd = obj.grad(x) + J.T @ z + cons.A.T @ y
    rp = cons.values(x) + s
    re = cons.A @ x - cons.b
    rc = s * z - mu
    return rd, rp, re, rc, J


def _pdipm(obj, cons: _Constraints, x0, cfg: SolveConfig, stop=None, label="barrier"):
    """Newton on the perturbed KKT system with a geometric mu schedule.

    ``stop(x)`` lets phase 1 quit as soon as a strictly feasible point shows up.
    Returns ``(report, x, s, z, y)``.
    """
    n = x0.size
    x = x0.astype(float).copy()
    cval = cons.values(x)
    s = np.maximum(-cval, 1e-3)
    mu = cfg.barrier_mu0
    z = mu / s
    y = np.zeros(cons.A.shape[0])
    eps = cfg.eps_inner
    mu_min = 0.1 * eps
    res = np.inf
    stalled = 0
    for it in range(cfg.inner_max_iters):
        rd, rp, re, rc, J = _kkt_residuals(obj, cons, x, s, z, y, mu)
        feas_err = max(np.max(np.abs(rd), initial=0), np.max(np.abs(re), initial=0), np.max(np.abs(rp), initial=0))
        res = max(feas_err, float(np.max(s * z, initial=0)))
        if stop is not None and stop(x) and np.max(np.abs(re), initial=0) <= eps:
            return InnerSolveReport(x, it, res, "converged", label), x, s, z, y
        if res <= eps:
            return InnerSolveReport(x, it, res, "converged", label), x, s, z, y
        stalled = stalled + 1 if mu <= mu_min else 0
        if stalled > 200:
            # degenerate problems can stall just above the tolerance
            return InnerSolveReport(x, it, res, "max_iters", label), x, s, z, y
        cent = max(feas_err, float(np.max(np.abs(rc), initial=0)))
        if cent <= max(10 * mu, eps) and mu > mu_min:
            mu = max(mu * cfg.barrier_shrink, mu_min)
            rc = s * z - mu
        w = z / s
        H = obj.hessian(x) + cons.weighted_hess(x, z) + J.T @ (w[:, None] * J)
        rhs = -rd - J.T @ (w * rp - rc / s)
        p = cons.A.shape[0]
        K = np.zeros((n + p, n + p))
        K[:n, :n] = H
        K[:n, n:] = cons.A.T
        K[n:, :n] = cons.A
        reg = 1e-14 * (1.0 + np.linalg.norm(H, np.inf))
        K[:n, :n] += reg * np.eye(n)
        if p:
            K[n:, n:] -= reg * np.eye(p)
        try:
            sol = np.linalg.solve(K, np.concatenate([rhs, -re]))
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(K, np.concatenate([rhs, -re]), rcond=None)[0]
        dx, dy = sol[:n], sol[n:]
        dz = w * (J @ dx + rp) - rc / s
        ds = -(rc + s * dz) / z
        alpha = 1.0
        for v, dv in ((s, ds), (z, dz)):
            neg = dv < 0
            if np.any(neg):
                alpha = min(alpha, 0.995 * float(np.min(-v[neg] / dv[neg])))
        merit0 = np.sqrt(rd @ rd + rp @ rp + re @ re + rc @ rc)
        for _ in range(60):
            xn, sn, zn, yn = x + alpha * dx, s + alpha * ds, z + alpha * dz, y + alpha * dy
            if _finite(obj(xn)) and _finite(cons.values(xn)):
                r = _kkt_residuals(obj, cons, xn, sn, zn, yn, mu)[:4]
                merit = np.sqrt(sum(v @ v for v in r))
                if merit <= (1 - 1e-4 * alpha) * merit0 or merit <= eps:
                    break
            alpha *= 0.5
        x, s, z, y = xn, sn, zn, yn
        if np.linalg.norm(x) > cfg.unbounded_norm_threshold:
            return InnerSolveReport(x, it + 1, res, "unbounded", label), x, s, z, y
    return InnerSolveReport(x, cfg.inner_max_iters, res, "max_iters", label), x, s, z, y


def _lift_constraint(c: SmoothFn) -> SmoothFn:
    """``(x, sigma) -> c(x) - sigma`` for phase 1."""
    n = c.dim

    def hess(v):
        H = np.zeros((n + 1, n + 1))
        H[:n, :n] = c.hessian(v[:n])
        return H

    return SmoothFn(
        n + 1,
        value=lambda v: c(v[:n]) - v[n],
        grad=lambda v: np.append(c.grad(v[:n]), -1.0),
        hess=hess,
        convexity="convex",
        name=f"{c.name}-sigma",
    )


def _phase1(cons: _Constraints, x0: np.ndarray, cfg: SolveConfig) -> np.ndarray:
    """A strictly feasible start, or InfeasibleSubproblem when none exists."""
    n = x0.size
    sigma0 = float(np.max(cons.values(x0), initial=0.0)) + 1.0
    G = np.vstack([np.hstack([cons.G, -np.ones((cons.G.shape[0], 1))]), np.append(np.zeros(n), -1.0)[None, :]])
    h = np.append(cons.h, 1.0)
    A = np.hstack([cons.A, np.zeros((cons.A.shape[0], 1))])
    lifted = _Constraints(G, h, A, cons.b, [_lift_constraint(c) for c in cons.smooth])
    sigma_obj = SmoothFn(
        n + 1,
        value=lambda v: float(v[n]),
        grad=lambda v: np.append(np.zeros(n), 1.0),
        hess=lambda v: np.zeros((n + 1, n + 1)),
        convexity="affine",
        name="sigma",
    )
    margin = 1e-8
    rep, v, *_ = _pdipm(sigma_obj, lifted, np.append(x0, sigma0), cfg, stop=lambda v: float(np.max(cons.values(v[:n]), initial=-1.0)) < -margin, label="phase1")
    x = v[:n]
    worst = float(np.max(cons.values(x), initial=-np.inf))
    if worst > _PHASE1_TOL and rep.status != "unbounded":
        raise InfeasibleSubproblem(f"linearized constraint set is empty (phase-1 value {worst:.3e})")
    return x


def _barrier(obj, cons: _Constraints, x0, cfg: SolveConfig) -> InnerSolveReport:
    cval = cons.values(x0)
    eq_ok = cons.A.shape[0] == 0 or np.max(np.abs(cons.A @ x0 - cons.b)) <= cfg.eps_inner
    if not (eq_ok and _finite(cval) and np.all(cval < 0)):
        x0 = _phase1(cons, x0, cfg)
    return _pdipm(obj, cons, x0, cfg)[0]


# ---------------------------------------------------------------------------


def inner_convex_solve(
    objective: SmoothFn,
    domain: Domain,
    linear_constraints: Sequence[tuple[np.ndarray, float]] = (),
    config: SolveConfig = SolveConfig(),
    *,
    convex_constraints: Sequence[SmoothFn] = (),
    x0=None,
    method: str | None = None,
) -> InnerSolveReport:
    """Minimize a convex ``objective`` over ``domain`` intersected with the constraints.

    ``linear_constraints`` are pairs ``(a, b)`` meaning ``<a, x> <= b``;
    ``convex_constraints`` are smooth convex ``c(x) <= 0``.  ``x0`` is the
    deterministic starting point (typically the current outer iterate).
    ``method`` forces a route: ``closed_form``, ``newton``, ``pgd`` or
    ``barrier``.  Otherwise ``config.inner_method`` is used when it can
    handle the constraints present, and the route is picked automatically
    if not.

    The report's status is ``converged``, ``max_iters`` or ``unbounded``; call
    :meth:`InnerSolveReport.require` to turn the latter two into exceptions.
    An empty feasible set raises :class:`InfeasibleSubproblem` directly.
    """
    n = objective.dim
    x0 = domain.interior_point() if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    constrained = bool(linear_constraints) or bool(convex_constraints)
    if method is None and config.inner_method is not None and (not constrained or config.inner_method == "barrier"):
        method = config.inner_method
    if method is None:
        if constrained:
            method = "barrier"
        elif domain.kind == "whole_space":
            method = "closed_form" if objective.quad is not None else "newton"
        else:
            method = "pgd"

    if method == "closed_form":
        if objective.quad is None or constrained or domain.kind != "whole_space":
            raise ValueError("closed_form needs an unconstrained quadratic")
        rep = _closed_form(objective, x0)
        return rep if rep is not None else _newton(objective, x0, config)
    if method == "newton":
        if constrained or domain.kind != "whole_space":
            raise ValueError("newton route is for unconstrained problems")
        return _newton(objective, x0, config)
    if method == "pgd":
        if constrained:
            raise ValueError("pgd route handles domain constraints only")
        return _pgd(objective, domain, x0, config)
    if method != "barrier":
        raise ValueError(f"unknown inner method {method!r}")

    G, h, A, b, smooth = domain.constraint_form()
    if linear_constraints:
        rows = np.array([np.asarray(a, dtype=float) for a, _ in linear_constraints]).reshape(-1, n)
        G = np.vstack([G, rows])
        h = np.concatenate([h, [float(o) for _, o in linear_constraints]])
    cons = _Constraints(G, h, A, b, list(smooth) + list(convex_constraints))
    if cons.n_ineq == 0 and A.shape[0] == 0:
        return inner_convex_solve(objective, domain, (), config, x0=x0)
    return _barrier(objective, cons, x0, config)
