"""Epigraph reformulations that turn DC programs into concave-over-convex problems.

A lift introduces one epigraph variable per convex part, ``f_j(x) <= t_j``,
so that the objective ``t_0 - g_0(x)`` and the constraints ``t_i - g_i(x)``
become concave in ``w = (x, t_0, ..., t_m)`` over a convex set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import HasConstraints, Unbounded
from .problems.dc import DCProblem
from .problems.domains import Domain
from .problems.functions import SmoothFn, combine
from .solvers.config import InnerSolveReport, SolveConfig
from .solvers.inner import inner_convex_solve


def _pad(fn: SmoothFn, n_total: int, name: str = "") -> SmoothFn:
    """``w -> fn(w[:n])`` on the lifted space."""
    n = fn.dim

    def hess(w):
        H = np.zeros((n_total, n_total))
        H[:n, :n] = fn.hessian(np.asarray(w)[:n])
        return H

    return SmoothFn(
        n_total,
        value=lambda w: fn.value(np.asarray(w, dtype=float)[..., :n]),
        grad=lambda w: np.concatenate([fn.grad(np.asarray(w, dtype=float)[:n]), np.zeros(n_total - n)]),
        hess=hess,
        convexity=fn.convexity,
        name=name or fn.name,
    )


def _t_minus(g: SmoothFn, j: int, n_total: int, name: str) -> SmoothFn:
    """``w -> w[n + j] - g(w[:n])``, concave when ``g`` is convex."""
    n = g.dim
    e = np.zeros(n_total - n)
    e[j] = 1.0

    def hess(w):
        H = np.zeros((n_total, n_total))
        H[:n, :n] = -g.hessian(np.asarray(w)[:n])
        return H

    tag = {"convex": "concave", "affine": "affine", "concave": "convex"}.get(g.convexity, "unknown")
    lip = g.lipschitz_grad
    return SmoothFn(
        n_total,
        value=lambda w: np.asarray(w, dtype=float)[..., n + j] - g.value(np.asarray(w, dtype=float)[..., :n]),
        grad=lambda w: np.concatenate([-g.grad(np.asarray(w, dtype=float)[:n]), e]),
        hess=hess,
        lipschitz_grad=lip,
        convexity=tag,
        name=name,
    )


@dataclass(frozen=True, eq=False)
class EpigraphLift:
    """Lifted problem ``min phi(w)`` over ``{x in D, f_j(x) <= t_j}`` with ``psi_i(w) <= 0``.

    ``epi`` holds ``f_0, ..., f_m``; ``psis`` the lifted constraints.
    """

    base: DCProblem
    kind: str
    phi: SmoothFn
    psis: tuple[SmoothFn, ...]
    epi: tuple[SmoothFn, ...]

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def lifted_dim(self) -> int:
        return self.base.dim + len(self.epi)

    @property
    def domain(self) -> Domain:
        return self.base.domain

    def embed(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.concatenate([x, [float(f(x)) for f in self.epi]])

    def extract(self, w) -> tuple[np.ndarray, np.ndarray]:
        w = np.asarray(w, dtype=float)
        return w[: self.dim].copy(), w[self.dim :].copy()

    def membership(self, w, tol: float = 1e-9) -> bool:
        x, t = self.extract(w)
        if w.shape != (self.lifted_dim,) or not self.domain.contains(x, tol):
            return False
        return all(float(f(x)) <= tj + tol for f, tj in zip(self.epi, t))

    def slackness(self, w) -> float:
        """``max_j |t_j - f_j(x)|``: zero on points produced by ``embed``."""
        x, t = self.extract(w)
        return max(abs(tj - float(f(x))) for f, tj in zip(self.epi, t))

    def linearized_halfspaces(self, w) -> list[tuple[np.ndarray, float]]:
        """``psi_i(w_k) + <grad psi_i(w_k), w - w_k> <= 0`` as ``(a, b)`` with ``<a, w> <= b``."""
        w = np.asarray(w, dtype=float)
        out = []
        for psi in self.psis:
            a = psi.grad(w)
            out.append((a, float(a @ w) - float(psi(w))))
        return out

    def linear_minimize(
        self,
        c,
        halfspaces: Sequence[tuple[np.ndarray, float]] = (),
        config: SolveConfig = SolveConfig(),
        x0=None,
        method: str = "reduced",
    ) -> tuple[np.ndarray, InnerSolveReport]:
        """Minimize ``<c, w>`` over the lifted set intersected with ``halfspaces``.

        ``reduced`` eliminates every ``t_j``: with nonnegative t-coefficients
        in ``c`` and in every halfspace, ``t_j = f_j(x)`` is optimal, leaving a
        convex problem in ``x`` alone.  ``lifted`` solves in ``(x, t)`` with
        the interior-point route instead; it serves as an independent check.
        """
        c = np.asarray(c, dtype=float)
        n, q = self.dim, len(self.epi)
        x0 = self.base.x_init if x0 is None else np.asarray(x0, dtype=float)[:n]
        ct = c[n:]
        at = [np.asarray(a, dtype=float)[n:] for a, _ in halfspaces]
        if method == "reduced" and (np.any(ct < 0) or any(np.any(v < 0) for v in at)):
            method = "lifted"
        if method == "reduced":
            terms = [(cj, f) for cj, f in zip(ct, self.epi) if cj != 0]
            obj = combine(terms or [(0.0, self.epi[0])], linear=c[:n], name="lmo")
            linear, convex = [], []
            for (a, b), a_t in zip(halfspaces, at):
                a = np.asarray(a, dtype=float)
                if np.all(a_t == 0):
                    linear.append((a[:n], b))
                else:
                    terms = [(aj, f) for aj, f in zip(a_t, self.epi) if aj != 0]
                    convex.append(combine(terms, linear=a[:n], const=-b, name="halfspace"))
            rep = inner_convex_solve(obj, self.domain, linear, config, convex_constraints=convex, x0=x0).require()
            return self.embed(rep.x_star), rep
        if method != "lifted":
            raise ValueError(f"unknown method {method!r}")
        if np.any(ct < 0):
            raise Unbounded("negative epigraph coefficient: the lifted objective is unbounded below")
        N = n + q
        G, h, A, b, smooth = self.domain.constraint_form()
        G = np.hstack([G, np.zeros((G.shape[0], q))])
        A = np.hstack([A, np.zeros((A.shape[0], q))])
        lifted_dom = Domain.whole_space(N)
        epi_cons = [
            combine([(1.0, _pad(f, N))], linear=-np.eye(N)[n + j], name=f"epi{j}") for j, f in enumerate(self.epi)
        ]
        lin = [(row, hv) for row, hv in zip(G, h)] + list(halfspaces)
        if A.shape[0]:
            lin += [(row, bv) for row, bv in zip(A, b)] + [(-row, -bv) for row, bv in zip(A, b)]
        start = self.embed(x0)
        start[n:] += 1.0
        rep = inner_convex_solve(
            combine([(0.0, _pad(self.epi[0], N))], linear=c, name="lmo"),
            lifted_dom,
            lin,
            config,
            convex_constraints=epi_cons + [_pad(s, N) for s in smooth],
            x0=start,
            method="barrier",
        ).require()
        return rep.x_star, rep


def _check_dims(p: DCProblem):
    if p.f.dim != p.g.dim:
        raise ValueError("dimension mismatch")


def lift_basic(p: DCProblem) -> EpigraphLift:
    """``min t - g(x)`` s.t. ``f(x) <= t`` for an unconstrained problem on the whole space."""
    if p.constraints:
        raise HasConstraints("lift_basic takes problems without DC constraints")
    if p.domain.kind != "whole_space":
        raise ValueError("lift_basic needs the whole space; use lift_convex_constrained")
    _check_dims(p)
    N = p.dim + 1
    return EpigraphLift(p, "basic", _t_minus(p.g, 0, N, "t-g(x)"), (), (p.f,))


def lift_convex_constrained(p: DCProblem) -> EpigraphLift:
    """As :func:`lift_basic` with ``x`` additionally restricted to the domain."""
    if p.constraints:
        raise HasConstraints("lift_convex_constrained takes problems without DC constraints")
    if p.domain.kind == "whole_space":
        raise ValueError("lift_convex_constrained needs a proper domain; use lift_basic")
    _check_dims(p)
    N = p.dim + 1
    return EpigraphLift(p, "convex_constrained", _t_minus(p.g, 0, N, "t-g(x)"), (), (p.f,))


def lift_dc_constrained(p: DCProblem) -> EpigraphLift:
    """``w = (x, t_0..t_m)``, ``phi = t_0 - g_0(x)``, ``psi_i = t_i - g_i(x)``."""
    if not p.constraints:
        raise ValueError("lift_dc_constrained needs at least one DC constraint")
    _check_dims(p)
    N = p.dim + 1 + p.m
    phi = _t_minus(p.g, 0, N, "t0-g0(x)")
    psis = tuple(_t_minus(gi, i + 1, N, f"t{i + 1}-g{i + 1}(x)") for i, (_, gi) in enumerate(p.constraints))
    epi = (p.f,) + tuple(fi for fi, _ in p.constraints)
    return EpigraphLift(p, "dc_constrained", phi, psis, epi)


def lift(p: DCProblem) -> EpigraphLift:
    """The lift matching the problem's structure."""
    if p.constraints:
        return lift_dc_constrained(p)
    if p.domain.kind == "whole_space":
        return lift_basic(p)
    return lift_convex_constrained(p)
