"""Classical methods recovered as FW (or CCCP) runs, each paired with its direct recursion.

Every ``*_via_fw`` function returns a :class:`PairedTrace` holding the FW
route, the textbook route and their per-iterate deviation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import NoSolution
from .problems.dc import DCProblem
from .problems.domains import Domain
from .problems.functions import SmoothFn, affine, combine, negate, quadratic, squared_distance
from .solvers.config import SolveConfig, StepRule
from .solvers.fw import fw_solve
from .solvers.inner import inner_convex_solve
from .solvers.trace import IterateTrace
from .transforms import EpigraphLift, lift

# ---------------------------------------------------------------------------
# oracles


@dataclass(frozen=True, eq=False)
class ProxOracle:
    """``prox(z, lam) = argmin_x h(x) + ||x - z||^2 / (2 lam)``.

    Besides the closed form, the oracle describes ``h`` structurally so that
    the FW route can solve its subproblem without calling ``prox``: a smooth
    convex function, the indicator of a domain, or a weighted l1 norm.
    """

    prox: Callable[[np.ndarray, float], np.ndarray]
    h_name: str
    value: Callable[[np.ndarray], float]
    smooth: SmoothFn | None = None
    indicator_of: Domain | None = None
    l1_weight: float | None = None

    def __call__(self, z, lam: float = 1.0) -> np.ndarray:
        return self.prox(np.atleast_1d(np.asarray(z, dtype=float)), lam)


def soft_threshold_prox(weight: float = 1.0) -> ProxOracle:
    """Prox of ``weight * ||x||_1``."""
    return ProxOracle(
        prox=lambda z, lam: np.sign(z) * np.maximum(np.abs(z) - lam * weight, 0.0),
        h_name=f"{weight:g}*|x|_1",
        value=lambda x: weight * float(np.sum(np.abs(x))),
        l1_weight=weight,
    )


def box_indicator_prox(lo, hi) -> ProxOracle:
    box = Domain.box(lo, hi)
    return ProxOracle(
        prox=lambda z, lam: box.project(z),
        h_name="indicator(box)",
        value=lambda x: 0.0 if box.contains(np.atleast_1d(x), 1e-12) else np.inf,
        indicator_of=box,
    )


def zero_prox(dim: int = 1) -> ProxOracle:
    return ProxOracle(
        prox=lambda z, lam: z.copy(),
        h_name="0",
        value=lambda x: 0.0,
        indicator_of=Domain.whole_space(dim),
    )


def quadratic_prox(a: float, center) -> ProxOracle:
    """Prox of ``(a/2)||x - center||^2``: ``(z + lam a center) / (1 + lam a)``."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    fn = squared_distance(center, a, name=f"{a:g}/2|x-c|^2")
    return ProxOracle(
        prox=lambda z, lam: (z + lam * a * center) / (1.0 + lam * a),
        h_name=fn.name,
        value=lambda x: float(fn(np.atleast_1d(x))),
        smooth=fn,
    )


@dataclass(frozen=True, eq=False)
class BregmanOracle:
    """A strongly convex ``phi`` with its divergence and conjugate gradient.

    ``mu`` is the declared strong-convexity modulus (Euclidean norm) on
    ``domain``.  ``conjugate_grad(z)`` maximizes ``<z, x> - phi(x)`` over the
    domain; on the simplex it is only defined up to adding a multiple of the
    all-ones vector to ``z``.
    """

    phi: SmoothFn
    mu: float
    conjugate_grad: Callable[[np.ndarray], np.ndarray]
    domain: Domain
    name: str = ""

    def bregman(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return float(self.phi(x) - self.phi(y) - self.phi.grad(y) @ (x - y))

    def divergence_fn(self, y) -> SmoothFn:
        """``x -> D_phi(x, y)`` as a smooth convex oracle."""
        y = np.asarray(y, dtype=float)
        gy = self.phi.grad(y)
        return combine([(1.0, self.phi)], linear=-gy, const=float(gy @ y - self.phi(y)), name=f"D({self.name})")


def euclidean_bregman(dim: int, L: float = 1.0) -> BregmanOracle:
    """``phi = (L/2)||x||^2``."""
    return BregmanOracle(
        squared_distance(np.zeros(dim), L, name=f"{L:g}/2|x|^2"),
        mu=L,
        conjugate_grad=lambda z: np.asarray(z, dtype=float) / L,
        domain=Domain.whole_space(dim),
        name="euclidean",
    )


def _entropy(dim: int) -> SmoothFn:
    def value(x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            return np.nan
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)
        return np.sum(terms, axis=-1)

    return SmoothFn(
        dim,
        value=value,
        grad=lambda x: np.log(np.asarray(x, dtype=float)) + 1.0,
        hess=lambda x: np.diag(1.0 / np.asarray(x, dtype=float)),
        convexity="convex",
        name="negentropy",
    )


def _softmax(z):
    z = np.asarray(z, dtype=float)
    e = np.exp(z - np.max(z))
    return e / e.sum()


def entropic_bregman(dim: int) -> BregmanOracle:
    """Negative entropy on the probability simplex (1-strongly convex by Pinsker)."""
    return BregmanOracle(_entropy(dim), mu=1.0, conjugate_grad=_softmax, domain=Domain.simplex(dim), name="entropic")


# ---------------------------------------------------------------------------
# paired results


@dataclass
class PairedTrace:
    name: str
    fw_iterates: np.ndarray
    direct_iterates: np.ndarray
    tol: float
    fw_trace: IterateTrace | None = None
    extra: dict = field(default_factory=dict)

    @property
    def deviations(self) -> np.ndarray:
        d = self.fw_iterates - self.direct_iterates
        return np.max(np.abs(d.reshape(d.shape[0], -1)), axis=1)

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviations))

    @property
    def passed(self) -> bool:
        return bool(self.max_deviation <= self.tol)

    def summary(self) -> str:
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'} max deviation {self.max_deviation:.3e} (tol {self.tol:.1e})"


def _cfg(config: SolveConfig, K: int, rule: StepRule | None = None) -> SolveConfig:
    return config.with_(max_outer_iters=K, gap_tol=0.0, step_rule=rule or StepRule("unit"))


def _interior(config: SolveConfig, breg: BregmanOracle) -> SolveConfig:
    # the entropy's gradient blows up at the simplex boundary, so keep inner iterates interior
    return config.with_(inner_method="barrier") if breg.domain.kind == "simplex" else config


# ---------------------------------------------------------------------------
# proximal point


def ppm_via_fw(f: SmoothFn, breg: BregmanOracle, x1, K: int, config: SolveConfig = SolveConfig()) -> PairedTrace:
    """Bregman proximal point as FW on ``min t - phi(x)`` s.t. ``f(x) + phi(x) <= t``."""
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    config = _interior(config, breg)
    p = DCProblem(combine([(1.0, f), (1.0, breg.phi)], name="f+phi"), breg.phi, breg.domain, (), x1, "ppm")
    tr = fw_solve(None, lift(p), _cfg(config, K))
    fw_x = np.array(tr.iterates)[:, : p.dim]
    xs = [x1]
    for _ in range(K):
        obj = combine([(1.0, f), (1.0, breg.divergence_fn(xs[-1]))], name="f+D")
        rep = inner_convex_solve(obj, breg.domain, (), config, x0=xs[-1]).require()
        xs.append(rep.x_star)
    return PairedTrace("ppm", fw_x, np.array(xs), 10 * config.eps_inner, tr)


# ---------------------------------------------------------------------------
# mirror descent


def _mirror_objective(f: SmoothFn, phi: SmoothFn) -> SmoothFn:
    """``(x, t) -> t + f(x) - phi(x)``."""
    n = f.dim

    def value(w):
        w = np.asarray(w, dtype=float)
        return w[..., n] + f.value(w[..., :n]) - phi.value(w[..., :n])

    def grad(w):
        w = np.asarray(w, dtype=float)
        return np.append(f.grad(w[:n]) - phi.grad(w[:n]), 1.0)

    quadratic = phi.quad is not None and f.quad is not None
    tag = "concave" if quadratic and np.all(np.linalg.eigvalsh(f.quad.H - phi.quad.H) <= 1e-12) else "unknown"
    return SmoothFn(n + 1, value, grad, convexity=tag, name="t+f-phi")


def mirror_descent_via_fw(
    f: SmoothFn,
    breg: BregmanOracle,
    x1,
    steps: Sequence[float] | Callable[[int], float] | float,
    K: int,
    config: SolveConfig = SolveConfig(),
) -> PairedTrace:
    """FW with the caller's step sizes on ``min t + f(x) - phi(x)`` s.t. ``phi(x) <= t``.

    The direct route is ``x_{k+1} = grad phi^*(grad phi(x_k) - eta_k grad f(x_k))``.
    The two agree for Euclidean ``phi`` with any steps, and for any ``phi``
    with unit steps; a non-quadratic ``phi`` with ``eta_k < 1`` generally
    makes them differ, since FW averages in the primal space while mirror
    descent averages in the dual space.
    """
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    if callable(steps):
        sched = steps
    elif np.isscalar(steps):
        sched = lambda k: float(steps)  # noqa: E731
    else:
        seq = list(steps)
        sched = lambda k: float(seq[k - 1])  # noqa: E731
    config = _interior(config, breg)
    cfg = _cfg(config, K, StepRule("custom", sched))
    base = DCProblem(breg.phi, breg.phi, breg.domain, (), x1, "mirror")
    lf = EpigraphLift(base, "mirror", _mirror_objective(f, breg.phi), (), (breg.phi,))
    tr = fw_solve(None, lf, cfg)
    fw_x = np.array(tr.iterates)[:, : f.dim]
    xs = [x1]
    for k in range(1, K + 1):
        x = xs[-1]
        xs.append(breg.conjugate_grad(breg.phi.grad(x) - sched(k) * f.grad(x)))
    out = PairedTrace("mirror", fw_x, np.array(xs), 10 * config.eps_inner, tr)
    if breg.phi.quad is not None:
        L = breg.mu
        gd = [x1]
        for k in range(1, K + 1):
            gd.append(gd[-1] - sched(k) * f.grad(gd[-1]) / L)
        out.extra["gradient_descent_deviation"] = float(np.max(np.abs(fw_x - np.array(gd))))
    return out


# ---------------------------------------------------------------------------
# proximal gradient


def _composite_lmo(v: np.ndarray, L: float, g: ProxOracle, x0: np.ndarray, config: SolveConfig) -> np.ndarray:
    """``argmin <v, x> + g(x) + (L/2)||x||^2`` without calling ``g.prox``."""
    n = v.size
    quad = squared_distance(np.zeros(n), L)
    if g.smooth is not None:
        obj = combine([(1.0, quad), (1.0, g.smooth)], linear=v)
        return inner_convex_solve(obj, Domain.whole_space(n), (), config, x0=x0).require().x_star
    if g.indicator_of is not None:
        obj = combine([(1.0, quad)], linear=v)
        return inner_convex_solve(obj, g.indicator_of, (), config, x0=x0).require().x_star
    if g.l1_weight is not None:
        # epigraph split of the l1 norm: |x_i| <= u_i
        w = g.l1_weight
        H = np.zeros((2 * n, 2 * n))
        H[:n, :n] = L * np.eye(n)
        obj = quadratic(H, np.concatenate([v, w * np.ones(n)]), name="split")
        I = np.eye(n)
        rows = [(np.concatenate([I[i], -I[i]]), 0.0) for i in range(n)]
        rows += [(np.concatenate([-I[i], -I[i]]), 0.0) for i in range(n)]
        start = np.concatenate([x0, np.abs(x0) + 1.0])
        rep = inner_convex_solve(obj, Domain.whole_space(2 * n), rows, config, x0=start).require()
        return rep.x_star[:n]
    raise ValueError(f"no FW model for {g.h_name}")


def prox_grad_via_fw(
    f: SmoothFn,
    L: float,
    g_prox: ProxOracle,
    x1,
    K: int,
    config: SolveConfig = SolveConfig(),
) -> PairedTrace:
    """FW with unit steps on ``min f(x) - (L/2)||x||^2 + t`` s.t. ``g(x) + (L/2)||x||^2 <= t``.

    The direct route is ``x_{k+1} = prox_{g/L}(x_k - grad f(x_k)/L)``.
    """
    x = np.atleast_1d(np.asarray(x1, dtype=float))
    n = x.size
    t = g_prox.value(x) + 0.5 * L * float(x @ x)
    tr = IterateTrace("fw", [np.append(x, t)])
    for _ in range(K):
        v = f.grad(x) - L * x
        xs = _composite_lmo(v, L, g_prox, x, config)
        ts = g_prox.value(xs) + 0.5 * L * float(xs @ xs)
        c = np.append(v, 1.0)
        gap = float(c @ (np.append(x, t) - np.append(xs, ts)))
        obj = float(f(x)) - 0.5 * L * float(x @ x) + t
        x, t = xs, ts
        tr.iterates.append(np.append(x, t))
        tr.add_row(objective=obj, fw_gap=gap, step=1.0, inner_iters=0)
    fw_x = np.array(tr.iterates)[:, :n]
    ds = [np.atleast_1d(np.asarray(x1, dtype=float))]
    for _ in range(K):
        z = ds[-1] - f.grad(ds[-1]) / L
        ds.append(g_prox(z, 1.0 / L))
    return PairedTrace("proxgrad", fw_x, np.array(ds), 10 * config.eps_inner, tr)


# ---------------------------------------------------------------------------
# dual-prox CCCP


def _solve_prox_equation(g_prox: ProxOracle, target: float, start: float, max_expand: int = 60) -> float:
    r = lambda z: float(g_prox(np.array([z]))[0]) - target  # noqa: E731
    lo, hi, width = start - 1.0, start + 1.0, 1.0
    for _ in range(max_expand):
        if r(lo) <= 0 <= r(hi):
            break
        width *= 2.0
        lo, hi = start - width, start + width
    else:
        raise NoSolution(f"prox_g(z) = {target:.6g} has no root in [{lo:.3g}, {hi:.3g}]")
    if r(lo) == 0:
        return lo
    if r(hi) == 0:
        return hi
    return float(brentq(r, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500))


def dual_cccp_prox(
    f_prox: ProxOracle,
    g_prox: ProxOracle,
    x1: float,
    eta: float | Callable[[int], float],
    K: int,
) -> IterateTrace:
    """1-D dual-prox CCCP: find ``x_k^*`` with ``prox_g(x_k^*) = prox_f(x_k)``, then average.

    ``extra["relation_residual"]`` records ``|prox_g(x_k^*) - prox_f(x_k)|``
    per step.
    """
    sched = eta if callable(eta) else (lambda k: float(eta))
    x = float(np.asarray(x1, dtype=float).reshape(-1)[0])
    tr = IterateTrace("dual_cccp_prox", [np.array([x])])
    for k in range(1, K + 1):
        target = float(f_prox(np.array([x]))[0])
        xs = _solve_prox_equation(g_prox, target, x)
        resid = abs(float(g_prox(np.array([xs]))[0]) - target)
        e = sched(k)
        obj = f_prox.value(np.array([x])) - g_prox.value(np.array([x]))
        x = (1.0 - e) * x + e * xs
        tr.iterates.append(np.array([x]))
        tr.add_row(objective=obj, step=e, inner_iters=0, relation_residual=resid, target=xs)
    return tr


# ---------------------------------------------------------------------------
# FW as CCCP


def _vertex_argmin(domain: Domain, c: np.ndarray) -> np.ndarray:
    """Minimize ``<c, x>`` over the domain by enumerating its extreme points."""
    if domain.kind in ("box", "simplex", "vertex_polytope") and (domain.kind != "box" or domain.dim <= 10):
        V = domain.extreme_points()
        return V[int(np.argmin(V @ c))].copy()
    return domain.lmo(c)


def fw_as_cccp(g: SmoothFn, X: Domain, x1, K: int, config: SolveConfig = SolveConfig()) -> PairedTrace:
    """CCCP with ``f`` the indicator of ``X`` against FW maximizing ``g`` with unit steps.

    The CCCP subproblem ``min_{x in X} -<grad g(x_k), x>`` is solved by
    enumerating the extreme points of ``X``; the FW route uses the domain's
    LMO.  Both break ties towards the lowest index.
    """
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    tr = fw_solve(negate(g), X, _cfg(config, K), x1)
    xs = [x1]
    for _ in range(K):
        xs.append(_vertex_argmin(X, -g.grad(xs[-1])))
    return PairedTrace("fwascccp", np.array(tr.iterates), np.array(xs), 10 * config.eps_inner, tr)


# ---------------------------------------------------------------------------
# shipped demos


def _demo_ppm(config):
    f = squared_distance([2.0], 1.0, name="0.5(x-2)^2")
    a = ppm_via_fw(f, euclidean_bregman(1), [0.0], 20, config)
    lin = affine([0.3, -0.2, 0.5], name="<a,x>")
    b = ppm_via_fw(lin, entropic_bregman(3), np.full(3, 1.0 / 3.0), 10, config)
    return [a, b]


def _demo_mirror(config):
    f = squared_distance([2.0], 1.0, name="0.5(x-2)^2")
    a = mirror_descent_via_fw(f, euclidean_bregman(1, 1.0), [0.0], 1.0, 10, config)
    b = mirror_descent_via_fw(affine([0.3, -0.2, 0.5]), entropic_bregman(3), np.full(3, 1 / 3), 1.0, 10, config)
    q = squared_distance([1.0, -1.0], 1.0)
    c = mirror_descent_via_fw(q, euclidean_bregman(2, 2.0), [0.5, 0.5], lambda k: 2.0 / (k + 1), 10, config)
    return [a, b, c]


def _demo_proxgrad(config):
    f = squared_distance([2.0], 1.0, name="0.5(x-2)^2")
    a = prox_grad_via_fw(f, 1.0, soft_threshold_prox(1.0), [0.0], 10, config)
    g = squared_distance([-1.0], 1.0, name="0.5(x+1)^2")
    b = prox_grad_via_fw(g, 1.0, box_indicator_prox([0.0], [1.0]), [0.7], 10, config)
    return [a, b]


def _demo_dualprox(config):
    tr = dual_cccp_prox(quadratic_prox(1.0, [0.0]), quadratic_prox(1.0, [1.0]), 0.0, 1.0, 10)
    resid = max(tr.extra["relation_residual"])
    direct = np.array([[-float(k)] for k in range(11)])
    return [PairedTrace("dualprox", np.array(tr.iterates), direct, 1e-10, tr, {"relation_residual": resid})]


def _demo_fwascccp(config):
    g = negate(squared_distance([3.0, -2.5], 1.0))
    return [fw_as_cccp(g, Domain.box([-1.0, -1.0], [1.0, 1.0]), [0.0, 0.0], 20, config)]


DEMOS: dict[str, Callable[[SolveConfig], list[PairedTrace]]] = {
    "ppm": _demo_ppm,
    "mirror": _demo_mirror,
    "proxgrad": _demo_proxgrad,
    "dualprox": _demo_dualprox,
    "fwascccp": _demo_fwascccp,
}


def run_demo(name: str, config: SolveConfig = SolveConfig()) -> list[PairedTrace]:
    if name not in DEMOS:
        raise KeyError(f"unknown demo {name!r}; choose from {sorted(DEMOS)}")
    return DEMOS[name](config)
