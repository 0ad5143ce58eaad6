"""Closed convex feasible sets with linear minimization and projection."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .functions import SmoothFn, combine, squared_distance

KINDS = ("whole_space", "box", "simplex", "l2_ball", "vertex_polytope")


def project_simplex(y: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) = radius} (sort-based)."""
    y = np.asarray(y, dtype=float)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, y.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(y - theta, 0.0)


def _project_hull(V: np.ndarray, y: np.ndarray, tol: float = 1e-15, max_iter: int = 50000):
    """Projection of y onto conv(rows of V) by accelerated projected gradient on weights."""
    m = V.shape[0]
    lam = np.full(m, 1.0 / m)
    lip = max(np.linalg.norm(V @ V.T, 2), 1e-300)
    z, lam_prev, theta = lam.copy(), lam.copy(), 1.0
    for _ in range(max_iter):
        g = V @ (V.T @ z - y)
        lam = project_simplex(z - g / lip)
        theta_next = 0.5 * (1 + np.sqrt(1 + 4 * theta**2))
        z = lam + ((theta - 1) / theta_next) * (lam - lam_prev)
        if np.linalg.norm(lam - lam_prev, 1) <= tol:
            break
        if (lam - lam_prev) @ (z - lam) > 0:  # adaptive restart
            theta_next, z = 1.0, lam.copy()
        lam_prev, theta = lam, theta_next
    return V.T @ lam


@dataclass(frozen=True, eq=False)
class Domain:
    """A closed convex set in R^dim.

    ``kind`` selects the geometry; the remaining fields are only meaningful for
    their kind (``lo``/``hi`` for boxes, ``radius`` for simplices and balls,
    ``center`` for balls, ``vertices`` for polytopes).
    """

    dim: int
    kind: str = "whole_space"
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    radius: float = 1.0
    center: np.ndarray | None = None
    vertices: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    # constructors -------------------------------------------------------

    @classmethod
    def whole_space(cls, dim: int) -> "Domain":
        return cls(dim)

    @classmethod
    def box(cls, lo, hi) -> "Domain":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError("box needs lo <= hi with equal shapes")
        return cls(lo.size, "box", lo=lo, hi=hi)

    @classmethod
    def simplex(cls, dim: int, radius: float = 1.0) -> "Domain":
        if radius <= 0:
            raise ValueError("simplex radius must be positive")
        return cls(dim, "simplex", radius=float(radius))

    @classmethod
    def l2_ball(cls, center, radius: float) -> "Domain":
        center = np.atleast_1d(np.asarray(center, dtype=float))
        return cls(center.size, "l2_ball", radius=float(radius), center=center)

    @classmethod
    def vertex_polytope(cls, vertices) -> "Domain":
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        return cls(V.shape[1], "vertex_polytope", vertices=V)

    # capabilities -------------------------------------------------------

    @property
    def bounded(self) -> bool:
        return self.kind != "whole_space"

    @property
    def diameter(self) -> float:
        if self.kind == "whole_space":
            return np.inf
        if self.kind == "box":
            return float(np.linalg.norm(self.hi - self.lo))
        if self.kind == "simplex":
            return self.radius * np.sqrt(2.0) if self.dim > 1 else 0.0
        if self.kind == "l2_ball":
            return 2.0 * self.radius
        V = self.vertices
        return float(max(np.linalg.norm(a - b) for a, b in itertools.combinations(V, 2))) if len(V) > 1 else 0.0

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        if self.kind == "whole_space":
            return True
        if self.kind == "box":
            return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))
        if self.kind == "simplex":
            return bool(np.all(x >= -tol) and abs(x.sum() - self.radius) <= tol * max(1, self.dim))
        if self.kind == "l2_ball":
            return bool(np.linalg.norm(x - self.center) <= self.radius + tol)
        return bool(np.linalg.norm(self.project(x) - x) <= tol)

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "whole_space":
            return x.copy()
        if self.kind == "box":
            return np.clip(x, self.lo, self.hi)
        if self.kind == "simplex":
            return project_simplex(x, self.radius)
        if self.kind == "l2_ball":
            d = x - self.center
            nd = np.linalg.norm(d)
            return x.copy() if nd <= self.radius else self.center + d * (self.radius / nd)
        return _project_hull(self.vertices, x)

    def lmo(self, c) -> np.ndarray:
        """A minimizer of <c, s> over the set; ties go to the lowest index."""
        c = np.asarray(c, dtype=float)
        if self.kind == "whole_space":
            raise NotImplementedError("whole_space has no linear minimization oracle")
        if self.kind == "box":
            return np.where(c < 0, self.hi, self.lo).astype(float)
        if self.kind == "simplex":
            s = np.zeros(self.dim)
            s[int(np.argmin(c))] = self.radius
            return s
        if self.kind == "l2_ball":
            nc = np.linalg.norm(c)
            if nc == 0:
                return self.center.copy()
            return self.center - self.radius * c / nc
        return self.vertices[int(np.argmin(self.vertices @ c))].copy()

    def extreme_points(self, limit: int = 1024) -> np.ndarray:
        """A finite set of extreme points (all of them when there are few)."""
        if self.kind == "box":
            if self.dim <= 10:
                corners = itertools.product(*zip(self.lo, self.hi))
                return np.array(list(corners), dtype=float)[:limit]
            rng = np.random.default_rng(0)
            return np.where(rng.random((limit, self.dim)) < 0.5, self.lo, self.hi)
        if self.kind == "simplex":
            return self.radius * np.eye(self.dim)
        if self.kind == "l2_ball":
            E = np.vstack([np.eye(self.dim), -np.eye(self.dim)])
            return self.center + self.radius * E
        if self.kind == "vertex_polytope":
            return self.vertices.copy()
        raise NotImplementedError("whole_space has no extreme points")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` random feasible points, shape ``(n, dim)``."""
        d = self.dim
        if self.kind == "box":
            return self.lo + (self.hi - self.lo) * rng.random((n, d))
        if self.kind == "simplex":
            return self.radius * rng.dirichlet(np.ones(d), size=n)
        if self.kind == "l2_ball":
            g = rng.standard_normal((n, d))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            r = rng.random(n) ** (1.0 / d)
            return self.center + self.radius * g * r[:, None]
        if self.kind == "vertex_polytope":
            w = rng.dirichlet(np.ones(len(self.vertices)), size=n)
            return w @ self.vertices
        raise NotImplementedError("cannot sample the whole space")

    def constraint_form(self):
        """Describe the set as ``G x <= h``, ``A x = b`` and smooth convex ``c(x) <= 0``.

        Used by the interior-point inner solver.  Polytopes given by vertices
        have no cheap inequality description and are rejected.
        """
        n = self.dim
        G, h = np.zeros((0, n)), np.zeros(0)
        A, b = np.zeros((0, n)), np.zeros(0)
        smooth: list[SmoothFn] = []
        if self.kind == "box":
            G = np.vstack([-np.eye(n), np.eye(n)])
            h = np.concatenate([-self.lo, self.hi])
        elif self.kind == "simplex":
            G, h = -np.eye(n), np.zeros(n)
            A, b = np.ones((1, n)), np.array([self.radius])
        elif self.kind == "l2_ball":
            ball = squared_distance(self.center, 1.0)
            smooth = [combine([(1.0, ball)], const=-0.5 * self.radius**2, name="ball")]
        elif self.kind == "vertex_polytope":
            raise NotImplementedError("vertex_polytope has no inequality description")
        return G, h, A, b, smooth

    def interior_point(self) -> np.ndarray:
        if self.kind == "box":
            return 0.5 * (self.lo + self.hi)
        if self.kind == "simplex":
            return np.full(self.dim, self.radius / self.dim)
        if self.kind == "l2_ball":
            return self.center.copy()
        if self.kind == "vertex_polytope":
            return self.vertices.mean(axis=0)
        return np.zeros(self.dim)
