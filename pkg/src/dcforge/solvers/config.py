"""Step-size rules, solver configuration and inner-solve reports."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from ..errors import MaxIters, Unbounded
from ..problems.functions import SmoothFn

STEP_KINDS = ("unit", "harmonic", "greedy_linesearch", "custom")
_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class StepRule:
    """How FW-type drivers choose ``eta_k`` in ``w_{k+1} = (1 - eta_k) w_k + eta_k w_k^*``.

    ``custom`` takes a caller-supplied ``schedule(k)``; it is used by the
    mirror-descent reduction, which is stated for arbitrary step sizes.
    """

    kind: str = "greedy_linesearch"
    schedule: Callable[[int], float] | None = None

    def __post_init__(self):
        if self.kind not in STEP_KINDS:
            raise ValueError(f"unknown step rule {self.kind!r}")
        if self.kind == "custom" and self.schedule is None:
            raise ValueError("custom step rule needs a schedule")

    def step(self, k: int, phi: SmoothFn | None = None, omega=None, target=None) -> float:
        if self.kind == "unit":
            return 1.0
        if self.kind == "harmonic":
            return 2.0 / (k + 1.0)
        if self.kind == "custom":
            eta = float(self.schedule(k))
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"step size {eta} outside [0, 1]")
            return eta
        return greedy_step(phi, np.asarray(omega, dtype=float), np.asarray(target, dtype=float))


def greedy_step(phi: SmoothFn, omega: np.ndarray, target: np.ndarray, iters: int = 60) -> float:
    """argmin over [0, 1] of ``phi((1 - eta) omega + eta target)``.

    Concave objectives always give 1: the FW direction is a descent direction
    and a concave restriction is minimized at an endpoint.  Quadratic
    restrictions are solved in closed form; anything else by golden section
    plus an endpoint comparison.
    """
    d = target - omega
    if phi.is_concave:
        return 1.0
    slope = float(phi.grad(omega) @ d)
    if phi.quad is not None:
        curv = float(d @ phi.quad.H @ d)
        if curv > 0:
            return float(np.clip(-slope / curv, 0.0, 1.0))
        return 1.0 if phi(target) <= phi(omega) else 0.0
    h = lambda eta: float(phi((1.0 - eta) * omega + eta * target))  # noqa: E731
    a, b = 0.0, 1.0
    c, e = b - _INV_PHI * (b - a), a + _INV_PHI * (b - a)
    hc, he = h(c), h(e)
    for _ in range(iters):
        if hc <= he:
            b, e, he = e, c, hc
            c = b - _INV_PHI * (b - a)
            hc = h(c)
        else:
            a, c, hc = c, e, he
            e = a + _INV_PHI * (b - a)
            he = h(e)
    best = min([(h(0.0), 0.0), (h(1.0), 1.0), (h(0.5 * (a + b)), 0.5 * (a + b))])
    return best[1]


@dataclass(frozen=True)
class SolveConfig:
    max_outer_iters: int = 100
    gap_tol: float = 0.0
    eps_inner: float = 1e-10
    inner_max_iters: int = 10_000
    step_rule: StepRule = StepRule()
    barrier_mu0: float = 1.0
    barrier_shrink: float = 0.2
    unbounded_norm_threshold: float = 1e8
    inner_method: str | None = None

    def __post_init__(self):
        if self.gap_tol < 0:
            raise ValueError("gap_tol must be nonnegative (0 disables the gap stop)")
        if self.eps_inner <= 0 or self.barrier_mu0 <= 0 or self.unbounded_norm_threshold <= 0:
            raise ValueError("tolerances and thresholds must be positive")
        if not 0.0 < self.barrier_shrink < 1.0:
            raise ValueError("barrier_shrink must lie in (0, 1)")
        if self.max_outer_iters < 1 or self.inner_max_iters < 1:
            raise ValueError("iteration limits must be positive")
        if self.inner_method not in (None, "closed_form", "newton", "pgd", "barrier"):
            raise ValueError(f"unknown inner method {self.inner_method!r}")

    def with_(self, **kw) -> "SolveConfig":
        return replace(self, **kw)


@dataclass
class InnerSolveReport:
    x_star: np.ndarray
    iterations: int
    residual: float
    status: str
    method: str = ""

    def require(self) -> "InnerSolveReport":
        """Raise unless the solve converged."""
        if self.status == "unbounded":
            raise Unbounded(f"subproblem unbounded below ({self.method})")
        if self.status == "max_iters":
            raise MaxIters(f"inner solver hit its iteration limit ({self.method}, residual {self.residual:.3e})")
        return self
