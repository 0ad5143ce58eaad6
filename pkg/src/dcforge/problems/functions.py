"""First-order oracles for smooth scalar functions on R^n.

A :class:`SmoothFn` bundles ``value`` and ``grad`` callables with optional
second-order and structural metadata.  Values of the zoo functions accept a
batch of points with shape ``(N, n)`` as well as a single point ``(n,)``;
gradients are only required to handle single points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

CONVEXITY_TAGS = ("convex", "concave", "affine", "unknown")


class Quadratic(NamedTuple):
    """Coefficients of ``0.5 x'Hx + c'x + const``."""

    H: np.ndarray
    c: np.ndarray
    const: float


@dataclass(frozen=True, eq=False)
class SmoothFn:
    dim: int
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray] | None = None
    lipschitz_grad: float | None = None
    convexity: str = "unknown"
    quad: Quadratic | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.convexity not in CONVEXITY_TAGS:
            raise ValueError(f"unknown convexity tag {self.convexity!r}")

    def __call__(self, x):
        return self.value(x)

    @property
    def is_convex(self) -> bool:
        return self.convexity in ("convex", "affine")

    @property
    def is_concave(self) -> bool:
        return self.convexity in ("concave", "affine")

    def hessian(self, x: np.ndarray) -> np.ndarray:
        if self.hess is not None:
            return np.atleast_2d(self.hess(x))
        return fd_hessian(self.grad, x)


def fd_hessian(grad: Callable, x: np.ndarray) -> np.ndarray:
    """Symmetrized central differences of the gradient."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.empty((n, n))
    for i in range(n):
        h = 1e-6 * (1.0 + abs(x[i]))
        e = np.zeros(n)
        e[i] = h
        H[:, i] = (grad(x + e) - grad(x - e)) / (2 * h)
    return 0.5 * (H + H.T)


def fd_gradient(value: Callable, x: np.ndarray, rel_step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient with step ``rel_step * (1 + |x_i|)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty(x.size)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        e = np.zeros(x.size)
        e[i] = h
        g[i] = (value(x + e) - value(x - e)) / (2 * h)
    return g


def _as_vec(v, n=None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if n is not None and v.shape != (n,):
        raise ValueError(f"expected shape ({n},), got {v.shape}")
    return v


def _hessian_tag(eig: np.ndarray) -> str:
    tol = 1e-12 * max(1.0, float(np.max(np.abs(eig))))
    if np.all(np.abs(eig) <= tol):
        return "affine"
    if eig[0] >= -tol:
        return "convex"
    if eig[-1] <= tol:
        return "concave"
    return "unknown"


def quadratic(H, c=None, const: float = 0.0, name: str = "quadratic") -> SmoothFn:
    H = np.atleast_2d(np.asarray(H, dtype=float))
    n = H.shape[0]
    H = 0.5 * (H + H.T)
    c = np.zeros(n) if c is None else _as_vec(c, n)
    const = float(const)
    eig = np.linalg.eigvalsh(H)
    tag = _hessian_tag(eig)

    def value(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.einsum("...i,...i->...", x @ H, x) + x @ c + const

    return SmoothFn(
        dim=n,
        value=value,
        grad=lambda x: H @ np.asarray(x, dtype=float) + c,
        hess=lambda x: H,
        lipschitz_grad=float(np.max(np.abs(eig))),
        convexity=tag,
        quad=Quadratic(H, c, const),
        name=name,
    )


def affine(a, b: float = 0.0, name: str = "affine") -> SmoothFn:
    a = _as_vec(a)
    return quadratic(np.zeros((a.size, a.size)), a, b, name=name)


def constant(dim: int, v: float, name: str = "const") -> SmoothFn:
    return quadratic(np.zeros((dim, dim)), np.zeros(dim), v, name=name)


def squared_distance(center, scale: float = 1.0, name: str = "sqdist") -> SmoothFn:
    """``(scale/2) ||x - center||^2``."""
    center = _as_vec(center)
    n = center.size
    return quadratic(scale * np.eye(n), -scale * center, 0.5 * scale * center @ center, name=name)


def _combined_tag(terms: Sequence[tuple[float, SmoothFn]]) -> str:
    convex = concave = True
    for coef, fn in terms:
        if coef == 0 or fn.convexity == "affine":
            continue
        if coef > 0:
            convex &= fn.convexity == "convex"
            concave &= fn.convexity == "concave"
        else:
            convex &= fn.convexity == "concave"
            concave &= fn.convexity == "convex"
    if convex and concave:
        return "affine"
    if convex:
        return "convex"
    if concave:
        return "concave"
    return "unknown"


def combine(
    terms: Sequence[tuple[float, SmoothFn]],
    linear=None,
    const: float = 0.0,
    name: str = "",
) -> SmoothFn:
    """``sum_j coef_j * fn_j(x) + <linear, x> + const``.

    Structural metadata (Hessian, quadratic coefficients, Lipschitz constant)
    is carried through whenever every term provides it.
    """
    terms = [(float(c), f) for c, f in terms]
    if not terms:
        raise ValueError("combine needs at least one term")
    n = terms[0][1].dim
    if any(f.dim != n for _, f in terms):
        raise ValueError("dimension mismatch in combine")
    lin = np.zeros(n) if linear is None else _as_vec(linear, n)
    const = float(const)

    def value(x):
        x = np.asarray(x, dtype=float)
        out = x @ lin + const
        for c, f in terms:
            out = out + c * f.value(x)
        return out

    def grad(x):
        x = np.asarray(x, dtype=float)
        out = lin.copy()
        for c, f in terms:
            out = out + c * f.grad(x)
        return out

    hess = None
    if all(f.hess is not None for _, f in terms):

        def hess(x):
            return sum(c * f.hessian(x) for c, f in terms)

    quad = None
    if all(f.quad is not None for _, f in terms):
        quad = Quadratic(
            sum(c * f.quad.H for c, f in terms),
            lin + sum(c * f.quad.c for c, f in terms),
            const + sum(c * f.quad.const for c, f in terms),
        )
    lip = None
    if all(f.lipschitz_grad is not None for _, f in terms):
        lip = float(sum(abs(c) * f.lipschitz_grad for c, f in terms))
    # an explicit Hessian settles curvature exactly; otherwise go by the terms' tags
    tag = _hessian_tag(np.linalg.eigvalsh(quad.H)) if quad is not None else _combined_tag(terms)
    return SmoothFn(
        dim=n,
        value=value,
        grad=grad,
        hess=hess,
        lipschitz_grad=lip,
        convexity=tag,
        quad=quad,
        name=name or "+".join(f.name for _, f in terms),
    )


def negate(fn: SmoothFn) -> SmoothFn:
    return combine([(-1.0, fn)], name=f"-{fn.name}")


def tilt(fn: SmoothFn, v) -> SmoothFn:
    """``fn(x) - <v, x>``: the convex surrogate with a linearized concave part."""
    return combine([(1.0, fn)], linear=-_as_vec(v, fn.dim), name=f"{fn.name}-<v,x>")


def power_1d(p: int, coef: float = 1.0, name: str | None = None) -> SmoothFn:
    """``coef * x**p`` on R for even ``p >= 2``."""
    if p < 2 or p % 2:
        raise ValueError("power_1d needs an even exponent >= 2")

    def value(x):
        x = np.asarray(x, dtype=float)
        return coef * x[..., 0] ** p

    return SmoothFn(
        dim=1,
        value=value,
        grad=lambda x: np.array([coef * p * float(x[0]) ** (p - 1)]),
        hess=lambda x: np.array([[coef * p * (p - 1) * float(x[0]) ** (p - 2)]]),
        convexity="convex" if coef >= 0 else "concave",
        name=name or f"x^{p}",
    )
