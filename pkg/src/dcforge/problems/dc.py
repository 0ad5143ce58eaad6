"""DC programs ``min f(x) - g(x)`` over a convex set with optional DC constraints."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import InfeasiblePoint, NonSymmetricInput, NotPSD
from .domains import Domain
from .functions import SmoothFn, affine, power_1d, quadratic, squared_distance


@dataclass(frozen=True, eq=False)
class DCProblem:
    f: SmoothFn
    g: SmoothFn
    domain: Domain
    constraints: tuple[tuple[SmoothFn, SmoothFn], ...] = ()
    x_init: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        n = self.f.dim
        fns = [self.g] + [h for pair in self.constraints for h in pair]
        if any(h.dim != n for h in fns) or self.domain.dim != n:
            raise ValueError("all oracles and the domain must share one dimension")
        object.__setattr__(self, "constraints", tuple(tuple(c) for c in self.constraints))
        x0 = np.zeros(n) if self.x_init is None else np.atleast_1d(np.asarray(self.x_init, dtype=float))
        object.__setattr__(self, "x_init", x0)
        if not self.is_feasible(x0, 1e-9):
            raise InfeasiblePoint(f"x_init is infeasible for {self.name or 'problem'}")

    @property
    def dim(self) -> int:
        return self.f.dim

    @property
    def m(self) -> int:
        return len(self.constraints)

    def objective(self, x):
        return self.f.value(x) - self.g.value(x)

    def objective_grad(self, x) -> np.ndarray:
        return self.f.grad(x) - self.g.grad(x)

    def constraint_values(self, x) -> np.ndarray:
        """``f_i(x) - g_i(x)`` for every constraint (last axis indexes i)."""
        x = np.asarray(x, dtype=float)
        if not self.constraints:
            return np.zeros(x.shape[:-1] + (0,))
        return np.stack([fi.value(x) - gi.value(x) for fi, gi in self.constraints], axis=-1)

    def is_feasible(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if not self.domain.contains(x, tol):
            return False
        return bool(np.all(self.constraint_values(x) <= tol))

    def dc_gap(self, x_k, x_next) -> float:
        """``f(x_k) - f(x_next) - <grad g(x_k), x_k - x_next>`` (objective pair only)."""
        x_k = np.asarray(x_k, dtype=float)
        x_next = np.asarray(x_next, dtype=float)
        return float(self.f(x_k) - self.f(x_next) - self.g.grad(x_k) @ (x_k - x_next))

    def with_start(self, x) -> "DCProblem":
        return DCProblem(self.f, self.g, self.domain, self.constraints, x, self.name)


@dataclass(frozen=True, eq=False)
class FWForm:
    """A problem stated directly in FW+ form: min phi over domain s.t. psi_i <= 0."""

    phi: SmoothFn
    domain: Domain
    psis: tuple[SmoothFn, ...]
    omega1: np.ndarray
    phi_star: float | None = None


@dataclass(frozen=True, eq=False)
class BenchmarkInstance:
    name: str
    problem: DCProblem
    known_optimum: tuple[np.ndarray, float] | None = None
    known_stationary_points: list[np.ndarray] | None = None
    provenance: str = "analytic"
    fw_form: FWForm | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.provenance not in ("analytic", "grid_oracle"):
            raise ValueError("provenance must be 'analytic' or 'grid_oracle'")

    @property
    def F_star(self) -> float | None:
        return None if self.known_optimum is None else self.known_optimum[1]


def _check_sym_psd(M: np.ndarray, label: str, rng: np.random.Generator) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{label} must be square")
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-12:
        raise NonSymmetricInput(f"{label} is not symmetric")
    n = M.shape[0]
    dirs = np.vstack([np.eye(n), rng.standard_normal((50, n))])
    rq = np.einsum("ij,jk,ik->i", dirs, M, dirs) / np.einsum("ij,ij->i", dirs, dirs)
    if np.min(rq) < -1e-10:
        raise NotPSD(f"{label} has a negative Rayleigh quotient {np.min(rq):.3e}")


def make_quadratic_dc(A, b, C, d, domain: Domain | None = None, x_init=None, name: str = "quadratic_dc") -> DCProblem:
    """``f = 0.5 x'Ax + b'x`` and ``g = 0.5 x'Cx + d'x``.

    Returns the problem; use :func:`quadratic_dc_instance` to also get the
    closed-form optimum when ``A - C`` is positive definite.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    d = np.atleast_1d(np.asarray(d, dtype=float))
    n = A.shape[0]
    if C.shape != A.shape or b.shape != (n,) or d.shape != (n,):
        raise ValueError("dimension mismatch between A, b, C, d")
    rng = np.random.default_rng(12345)
    _check_sym_psd(A, "A", rng)
    _check_sym_psd(C, "C", rng)
    domain = Domain.whole_space(n) if domain is None else domain
    return DCProblem(quadratic(A, b, name="f"), quadratic(C, d, name="g"), domain, (), x_init, name)


def quadratic_dc_instance(A, b, C, d, domain: Domain | None = None, x_init=None, name="quadratic_dc") -> BenchmarkInstance:
    p = make_quadratic_dc(A, b, C, d, domain, x_init, name)
    opt = None
    if p.domain.kind == "whole_space":
        D = p.f.quad.H - p.g.quad.H
        r = p.f.quad.c - p.g.quad.c
        if np.all(D == 0) and np.all(r == 0):
            opt = (p.x_init.copy(), 0.0)
        else:
            try:
                np.linalg.cholesky(D)
            except np.linalg.LinAlgError:
                pass
            else:
                xs = -np.linalg.solve(D, r)
                opt = (xs, float(p.objective(xs)))
    return BenchmarkInstance(name, p, opt, None if opt is None else [opt[0]], "analytic")


def make_quartic_dc_1d(x_init: float = 1.0) -> BenchmarkInstance:
    """``x^4 - x^2``; CCCP reduces to ``x -> (x/2)^(1/3)``."""
    s = 1.0 / np.sqrt(2.0)
    p = DCProblem(power_1d(4, name="x^4"), power_1d(2, name="x^2"), Domain.whole_space(1), (), [x_init], "quartic1d")
    return BenchmarkInstance(
        "quartic1d",
        p,
        known_optimum=(np.array([s]), -0.25),
        known_stationary_points=[np.array([0.0]), np.array([s]), np.array([-s])],
        provenance="analytic",
        meta={"cccp_map": lambda x: np.cbrt(x / 2.0)},
    )


def make_ring_constrained_dc_2d(variant: str = "v1") -> BenchmarkInstance:
    """Two-dimensional DC-constrained instances.

    Objective ``0.5||x||^2 - <(1,1), x>``.  ``v1`` constrains by
    ``||x||^2 - ||x - (1,0)||^2 = 2 x_1 - 1 <= 0``; ``v2`` by
    ``||x||^2 - (0.5||x||^2 + 1) <= 0``.
    """
    f0 = squared_distance(np.zeros(2), 1.0, name="0.5||x||^2")
    g0 = affine([1.0, 1.0], name="<1,x>")
    if variant == "v1":
        f1 = squared_distance(np.zeros(2), 2.0, name="||x||^2")
        g1 = squared_distance([1.0, 0.0], 2.0, name="||x-c||^2")
        p = DCProblem(f0, g0, Domain.whole_space(2), ((f1, g1),), [0.0, 0.0], "ring2d:v1")
        xs = np.array([0.5, 1.0])
        return BenchmarkInstance("ring2d:v1", p, (xs, float(p.objective(xs))), [xs], "analytic")
    if variant == "v2":
        f1 = squared_distance(np.zeros(2), 2.0, name="||x||^2")
        g1 = quadratic(np.eye(2), np.zeros(2), 1.0, name="0.5||x||^2+1")
        p = DCProblem(f0, g0, Domain.whole_space(2), ((f1, g1),), [-1.0, 0.5], "ring2d:v2")
        xs = np.array([1.0, 1.0])
        return BenchmarkInstance("ring2d:v2", p, (xs, float(p.objective(xs))), [xs], "analytic")
    raise ValueError(f"unknown ring variant {variant!r}")


def dc_constrained(
    f0: SmoothFn,
    g0: SmoothFn,
    constraints: Sequence[tuple[SmoothFn, SmoothFn]],
    x_init,
    domain: Domain | None = None,
    name: str = "",
) -> DCProblem:
    return DCProblem(f0, g0, domain or Domain.whole_space(f0.dim), tuple(constraints), x_init, name)


def fequalg_instance(dim: int = 2, x_init=None) -> BenchmarkInstance:
    """``f = g``: every point is stationary and F is identically zero."""
    rng = np.random.default_rng(7)
    B = rng.standard_normal((dim, dim))
    A = B.T @ B + np.eye(dim)
    A = 0.5 * (A + A.T)
    b = rng.standard_normal(dim)
    x0 = np.full(dim, 0.3) if x_init is None else x_init
    return quadratic_dc_instance(A, b, A, b, x_init=x0, name="fequalg")

