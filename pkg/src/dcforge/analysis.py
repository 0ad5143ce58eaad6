"""Gap functions, curvature estimates, stationarity checks and rate certificates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasiblePoint, UnboundedDomain
from .problems.dc import DCProblem
from .problems.domains import Domain
from .problems.functions import SmoothFn, affine
from .solvers.config import SolveConfig, StepRule
from .solvers.inner import inner_convex_solve
from .solvers.trace import IterateTrace
from .transforms import EpigraphLift, lift

CERT_KINDS = (
    "lemma1_rate",
    "corollary2_rate",
    "theorem3_rate",
    "corollary6_rate",
    "appendix_convex_phi",
    "appendix_convex_psi",
    "equivalence",
    "kkt",
    "stationarity",
    "not_applicable",
)
FW_GAP_KINDS = ("lemma1_rate", "theorem3_rate")
DC_GAP_KINDS = ("corollary2_rate", "corollary6_rate")


@dataclass
class GapRecord:
    iteration: int
    fw_gap: float | None
    dc_gap: float | None
    kkt_residual: float | None = None
    bound_rhs: float | None = None


@dataclass
class CurvatureEstimate:
    sampled_lower_bound: float
    analytic_upper_bound: float | None
    samples: int


@dataclass
class Certificate:
    kind: str
    passed: bool
    worst_margin: float
    details: str = ""
    tolerance: float = 0.0
    records: list[GapRecord] = field(default_factory=list, repr=False)

    def line(self) -> str:
        return f"{self.kind} {'PASS' if self.passed else 'FAIL'} {self.worst_margin:.17g}"


def _cert(kind, margin, tol, details="", records=None) -> Certificate:
    if kind not in CERT_KINDS:
        raise ValueError(f"unknown certificate kind {kind!r}")
    margin = float(margin) + 0.0  # no negative zero in reports
    return Certificate(kind, bool(margin >= -tol), margin, details, tol, records or [])


# ---------------------------------------------------------------------------
# gaps


def dc_gap(p: DCProblem, x_k, x_next) -> float:
    """``f(x_k) - f(x_next) - <grad g(x_k), x_k - x_next>``."""
    return p.dc_gap(x_k, x_next)


def fw_gap(phi: SmoothFn, feasible: Domain | EpigraphLift, omega, config: SolveConfig = SolveConfig()) -> float:
    """``max over the feasible set of <grad phi(w), w - s>`` via one LMO."""
    omega = np.asarray(omega, dtype=float)
    c = phi.grad(omega)
    if isinstance(feasible, EpigraphLift):
        s, _ = feasible.linear_minimize(c, (), config, x0=omega)
    else:
        if feasible.kind == "whole_space":
            s = inner_convex_solve(affine(c), feasible, (), config, x0=omega).require().x_star
        else:
            s = feasible.lmo(c)
    return float(c @ (omega - s))


# ---------------------------------------------------------------------------
# curvature


def estimate_curvature(
    phi: SmoothFn,
    domain: Domain,
    n_pairs: int = 200,
    n_etas: int = 10,
    seed: int = 0,
) -> CurvatureEstimate:
    """Largest sampled value of ``(2/eta^2)(phi(w + eta(s - w)) - phi(w) - eta <grad phi(w), s - w>)``.

    Pairs are drawn from the domain and its extreme points; ``eta`` runs over
    ``{1/n_etas, ..., 1}``.  The analytic bound ``L * D^2`` is attached when
    the gradient Lipschitz constant is known.
    """
    D = domain.diameter
    if not np.isfinite(D):
        raise UnboundedDomain("curvature estimates need a bounded domain")
    rng = np.random.default_rng(seed)
    pts = domain.sample(rng, n_pairs)
    ext = domain.extreme_points()
    hats = np.vstack([domain.sample(rng, n_pairs // 2), ext[rng.integers(0, len(ext), n_pairs - n_pairs // 2)]])
    etas = np.arange(1, n_etas + 1) / n_etas
    best = -np.inf
    for w, s in zip(pts, hats):
        d = s - w
        fw, slope = float(phi(w)), float(phi.grad(w) @ d)
        for eta in etas:
            q = (2.0 / eta**2) * (float(phi(w + eta * d)) - fw - eta * slope)
            best = max(best, q)
    upper = None if phi.lipschitz_grad is None else float(phi.lipschitz_grad * D**2)
    return CurvatureEstimate(float(best), upper, int(n_pairs * n_etas))


def curvature_upper_bound(phi: SmoothFn, domain: Domain) -> float:
    if phi.lipschitz_grad is None:
        raise ValueError(f"{phi.name or 'phi'} has no known gradient Lipschitz constant")
    D = domain.diameter
    if not np.isfinite(D):
        raise UnboundedDomain("L * D^2 needs a bounded domain")
    return float(phi.lipschitz_grad * D**2)


# ---------------------------------------------------------------------------
# stationarity


def check_stationarity(target, omega_star, tol: float = 1e-6, config: SolveConfig = SolveConfig()) -> Certificate:
    """First-order stationarity: no descent direction inside the linearized set.

    ``target`` is a DCProblem (checked through its lift, ``omega_star`` is then
    a base point ``x``), an EpigraphLift, or a tuple ``(phi, domain, psis)``.
    The margin is ``min <grad phi(w*), w - w*>`` over
    ``{w in D : psi_i(w*) + <grad psi_i(w*), w - w*> <= 0}``, which is at most 0.
    """
    if isinstance(target, DCProblem):
        lf = lift(target)
        x = np.atleast_1d(np.asarray(omega_star, dtype=float))
        if not target.is_feasible(x, tol):
            raise InfeasiblePoint("point violates the DC problem's constraints")
        return check_stationarity(lf, lf.embed(x), tol, config)
    w = np.asarray(omega_star, dtype=float)
    if isinstance(target, EpigraphLift):
        phi, psis = target.phi, target.psis
        if not target.membership(w, tol):
            raise InfeasiblePoint("point is outside the lifted set")
    else:
        phi, domain, psis = target
        if not domain.contains(w, tol):
            raise InfeasiblePoint("point is outside the domain")
    if any(float(psi(w)) > tol for psi in psis):
        raise InfeasiblePoint("point violates a constraint")
    c = phi.grad(w)
    halfspaces = []
    for psi in psis:
        a = psi.grad(w)
        halfspaces.append((a, float(a @ w) - float(psi(w))))
    if isinstance(target, EpigraphLift):
        s, _ = target.linear_minimize(c, halfspaces, config, x0=w)
    elif halfspaces or domain.kind == "whole_space":
        s = inner_convex_solve(affine(c), domain, halfspaces, config, x0=w).require().x_star
    else:
        s = domain.lmo(c)
    margin = min(float(c @ (s - w)), 0.0)
    return _cert("stationarity", margin, tol, f"directional minimum {margin:.3e}")


# ---------------------------------------------------------------------------
# certificates


def _phi_star(known_optimum) -> float | None:
    if known_optimum is None:
        return None
    if isinstance(known_optimum, tuple):
        return float(known_optimum[1])
    return float(known_optimum)


def certify_rates(
    trace: IterateTrace,
    known_optimum,
    kind: str,
    *,
    eps_inner: float = 1e-10,
    curvature: float | None = None,
    psis=(),
) -> Certificate:
    """Check a stated rate at every recorded iteration.

    ``known_optimum`` is ``phi*`` (or an ``(x*, phi*)`` pair).  The convex-mode
    kinds need ``curvature``, the ``L * D^2`` bound of the function in
    question; ``appendix_convex_psi`` also needs the constraint functions.
    """
    tol = 10 * eps_inner
    K = trace.n_iters
    k = np.arange(1, K + 1, dtype=float)
    if kind in FW_GAP_KINDS + DC_GAP_KINDS:
        fstar = _phi_star(known_optimum)
        if fstar is None:
            return Certificate("not_applicable", True, 0.0, f"{kind}: optimum unknown")
        src = trace.fw_gap if kind in FW_GAP_KINDS else trace.dc_gap
        if any(v is None for v in src):
            # CCCP records only the DC gap and FW only the FW gap on geometric domains
            src = trace.dc_gap if kind in FW_GAP_KINDS else trace.fw_gap
        gaps = np.array(src, dtype=float)
        observed = np.minimum.accumulate(gaps)
        bound = (trace.meta["phi1"] - fstar) / k
    elif kind == "appendix_convex_phi":
        fstar = _phi_star(known_optimum)
        if fstar is None or curvature is None:
            return Certificate("not_applicable", True, 0.0, f"{kind}: needs phi* and C")
        observed = np.array(trace.objective) - fstar
        bound = 2.0 * curvature / (k + 1.0)
    elif kind == "appendix_convex_psi":
        if curvature is None or not psis:
            return Certificate("not_applicable", True, 0.0, f"{kind}: needs C and psi")
        observed = np.array([max(float(p(w)) for p in psis) for w in trace.iterates[:K]])
        bound = 2.0 * curvature / (k + 1.0)
    else:
        raise ValueError(f"{kind!r} is not a rate certificate")
    margins = bound - observed
    i = int(np.argmin(margins))
    records = [GapRecord(j + 1, trace.fw_gap[j], trace.dc_gap[j], trace.kkt_residual[j], float(bound[j])) for j in range(K)]
    details = f"{K} iterations, worst at k={i + 1}: observed {observed[i]:.6g} vs bound {bound[i]:.6g}"
    return _cert(kind, margins[i], tol, details, records)


def certify_kkt(trace: IterateTrace, tol: float = 1e-8) -> Certificate:
    """``||grad f(x_{k+1}) - grad g(x_k)||`` and, on lifts, ``|t_k - f(x_k)|`` along a trace."""
    vals = [v for v in trace.kkt_residual if v is not None] + list(trace.extra.get("slackness", []))
    if not vals:
        return Certificate("not_applicable", True, 0.0, "kkt: nothing recorded")
    worst = max(vals)
    return _cert("kkt", -worst, tol, f"worst residual {worst:.3e}")


def _paired_runs(p: DCProblem, config: SolveConfig, lmo_method: str):
    from .solvers import cccp_plus_solve, cccp_solve, fw_plus_solve, fw_solve

    lf = lift(p)
    if p.constraints:
        return lf, (lambda: cccp_plus_solve(p, config)), (lambda: fw_plus_solve(None, lf, None, config, lmo_method=lmo_method))
    return lf, (lambda: cccp_solve(p, config)), (lambda: fw_solve(None, lf, config, lmo_method=lmo_method))


def certify_equivalence(
    p: DCProblem,
    config: SolveConfig = SolveConfig(),
    K: int = 50,
    *,
    tol: float | None = None,
    lmo_method: str = "reduced",
) -> Certificate:
    """Run CCCP(+) and FW(+) on the lift from the same start and compare step by step.

    Compared per iteration: base iterates, DC gap against FW gap, the KKT
    residual of the direct run (whole space only) and complementary slackness
    ``t_k = f(x_k)`` on the lifted run.
    """
    tol = 10 * config.eps_inner if tol is None else tol
    cfg = config.with_(max_outer_iters=K, gap_tol=0.0, step_rule=StepRule("unit"))
    lf, run_direct, run_fw = _paired_runs(p, cfg, lmo_method)
    outcomes = []
    for run in (run_direct, run_fw):
        try:
            outcomes.append(run())
        except Exception as exc:  # both routes must fail the same way
            outcomes.append(exc)
    a, b = outcomes
    if isinstance(a, Exception) or isinstance(b, Exception):
        same = type(a) is type(b)
        return _cert("equivalence", 0.0 if same else -np.inf, tol, f"direct: {a!r}; lifted: {b!r}")
    n = p.dim
    X, W = np.array(a.iterates), np.array(b.iterates)
    if X.shape[0] != W.shape[0]:
        return _cert("equivalence", -np.inf, tol, "traces have different lengths")
    dev_x = float(np.max(np.abs(X - W[:, :n])))
    dev_gap = float(np.max(np.abs(np.array(a.dc_gap) - np.array(b.fw_gap))))
    kkt = [v for v in a.kkt_residual if v is not None]
    dev_kkt = max(kkt, default=0.0)
    dev_slack = max(lf.slackness(w) for w in W)
    worst = max(dev_x, dev_gap, dev_kkt, dev_slack)
    details = f"K={K} x {dev_x:.3e} gap {dev_gap:.3e} kkt {dev_kkt:.3e} slackness {dev_slack:.3e}"
    return _cert("equivalence", -worst, tol, details)
