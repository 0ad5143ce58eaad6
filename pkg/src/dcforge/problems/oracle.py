"""Brute-force grid search used as an independent test oracle (dim <= 2)."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionTooLarge
from .dc import DCProblem


def _eval(fn, X):
    out = np.asarray(fn(X), dtype=float)
    if out.shape == (X.shape[0],):
        return out
    return np.array([float(fn(x)) for x in X])


def _values(problem: DCProblem, X: np.ndarray, tol: float):
    F = _eval(problem.f, X) - _eval(problem.g, X)
    feas = np.ones(X.shape[0], dtype=bool)
    for fi, gi in problem.constraints:
        feas &= _eval(fi, X) - _eval(gi, X) <= tol
    d = problem.domain
    if d.kind == "box":
        feas &= np.all((X >= d.lo - tol) & (X <= d.hi + tol), axis=1)
    elif d.kind != "whole_space":
        feas &= np.array([d.contains(x, tol) for x in X])
    return F, feas


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    # integer multiples of step so that round numbers land exactly on the grid
    i0, i1 = int(np.ceil(lo / step - 1e-9)), int(np.floor(hi / step + 1e-9))
    return np.arange(i0, i1 + 1) * step


def _local_minima_1d(F, feas):
    Fm = np.where(feas, F, np.inf)
    left = np.concatenate([[np.inf], Fm[:-1]])
    right = np.concatenate([Fm[1:], [np.inf]])
    return np.nonzero(feas & (Fm <= left) & (Fm <= right))[0]


def _grid_2d(problem, xs, ys, tol, chunk=256):
    """Yield (indices, F) of feasible 8-neighbour local minima, row chunks with a halo."""
    ny = ys.size
    found = []
    for r0 in range(0, xs.size, chunk):
        lo, hi = max(r0 - 1, 0), min(r0 + chunk + 1, xs.size)
        X = np.stack(np.meshgrid(xs[lo:hi], ys, indexing="ij"), axis=-1).reshape(-1, 2)
        F, feas = _values(problem, X, tol)
        Fm = np.where(feas, F, np.inf).reshape(hi - lo, ny)
        P = np.pad(Fm, 1, constant_values=np.inf)
        is_min = feas.reshape(hi - lo, ny).copy()
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di or dj:
                    is_min &= Fm <= P[1 + di : 1 + di + hi - lo, 1 + dj : 1 + dj + ny]
        rows = slice(r0 - lo, r0 - lo + min(chunk, xs.size - r0))
        ii, jj = np.nonzero(is_min[rows])
        for i, j in zip(ii, jj):
            found.append((r0 + i, j, Fm[rows][i, j]))
    return found


def _zoom(problem, p, step, refine_to, tol, half=15, max_slides=2000):
    """Slide a window along descent until its argmin is interior, then shrink it 10x.

    Sliding removes the staircase minima that a coarse grid produces along
    curved constraint boundaries.
    """
    dim = p.size
    offsets = np.arange(-half, half + 1)
    h = step
    while True:
        for _ in range(max_slides):
            axes = [p[k] + h * offsets for k in range(dim)]
            X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
            F, feas = _values(problem, X, tol)
            if not feas.any():
                return p
            k = int(np.argmin(np.where(feas, F, np.inf)))
            idx = np.unravel_index(k, (offsets.size,) * dim)
            moved = not np.array_equal(X[k], p)
            p = X[k]
            if not (moved and any(i in (0, offsets.size - 1) for i in idx)):
                break
        if h <= refine_to:
            return p
        h /= 10.0


def _active(problem, p, step):
    """Index of a DC constraint within a few grid cells of p, else None."""
    best = None
    for i, (fi, gi) in enumerate(problem.constraints):
        gc = fi.grad(p) - gi.grad(p)
        v = float(fi(p) - gi(p))
        if v >= -3 * step * np.linalg.norm(gc) and np.linalg.norm(gc) > 0:
            if best is None or v > best[1]:
                best = (i, v)
    return None if best is None else best[0]


def _boundary_zoom(problem, p, i, step, refine_to, tol, half=15, max_slides=2000):
    """Brute force along the curve ``c_i = 0`` near p (2-D only).

    Points on a tangent line are pushed onto the curve by bisection along the
    normal, which sidesteps the grid's jagged approximation of the boundary.
    """
    fi, gi = problem.constraints[i]
    c = lambda X: _eval(fi, X) - _eval(gi, X)  # noqa: E731
    offsets = np.arange(-half, half + 1)
    h = step
    while True:
        for _ in range(max_slides):
            gc = fi.grad(p) - gi.grad(p)
            n = gc / np.linalg.norm(gc)
            u = np.array([-n[1], n[0]])
            S = p + h * offsets[:, None] * u
            L = 20 * h + 10 * (half * h) ** 2
            lo, hi = np.full(S.shape[0], -L), np.full(S.shape[0], L)
            ok = (c(S + lo[:, None] * n) <= 0) & (c(S + hi[:, None] * n) > 0)
            while np.max(hi - lo) > 1e-3 * h:
                mid = 0.5 * (lo + hi)
                inside = c(S + mid[:, None] * n) <= 0
                lo, hi = np.where(inside, mid, lo), np.where(inside, hi, mid)
            B = S + lo[:, None] * n
            F, feas = _values(problem, B, tol)
            feas &= ok
            if not feas.any():
                return None
            k = int(np.argmin(np.where(feas, F, np.inf)))
            moved = not np.allclose(B[k], p, rtol=0, atol=1e-15)
            p = B[k]
            if not (moved and k in (0, offsets.size - 1)):
                break
        if h <= refine_to:
            break
        h /= 10.0
    # the curve minimum only counts if the constraint actually blocks descent
    probe = p - 1e-4 * n
    F_in, feas_in = _values(problem, probe[None, :], tol)
    if feas_in[0] and F_in[0] < float(problem.objective(p)):
        return None
    return p


def _refine(problem, p, step, refine_to, tol):
    q = _zoom(problem, p, step, refine_to, tol)
    cands = [q]
    if problem.dim == 2:
        # the windowed zoom may slide from one constraint curve onto another
        for start in (p, q):
            i = _active(problem, start, step)
            if i is not None:
                b = _boundary_zoom(problem, start, i, step, refine_to, tol)
                if b is not None:
                    cands.append(b)
    return min(cands, key=lambda r: float(problem.objective(r)))


def _is_local_min(problem, p, rho, tol, n=4000, slack=1e-7):
    """No feasible random point within ``rho`` of p improves on it by more than ``slack``."""
    rng = np.random.default_rng(0)
    dim = p.size
    d = rng.standard_normal((n, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = rho * rng.random(n) ** (1.0 / dim)
    F, feas = _values(problem, p + d * r[:, None], tol)
    if not feas.any():
        return True
    return bool(np.min(F[feas]) >= float(problem.objective(p)) - slack)


def grid_stationary_oracle(
    problem: DCProblem,
    box,
    step: float,
    tol: float = 1e-9,
    refine_to: float | None = None,
) -> list[np.ndarray]:
    """Feasible grid points that are no worse than any feasible grid neighbour.

    ``box`` is a pair ``(lo, hi)`` of length-dim sequences.  With
    ``refine_to`` set, each local minimum is zoomed in on by repeated 10x finer
    windowed grids until the spacing drops below ``refine_to`` (in 2-D, points
    next to a DC constraint are also refined along the constraint curve);
    nearby duplicates are then merged.  Without it the raw grid minima are returned
    (plateaus included).
    """
    if problem.dim > 2:
        raise DimensionTooLarge(f"grid oracle supports dim <= 2, got {problem.dim}")
    lo, hi = (np.atleast_1d(np.asarray(v, dtype=float)) for v in box)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("grid box must be finite")
    if problem.dim == 1:
        xs = _axis(lo[0], hi[0], step)
        X = xs[:, None]
        F, feas = _values(problem, X, tol)
        pts = [(X[i], F[i]) for i in _local_minima_1d(F, feas)]
    else:
        xs, ys = _axis(lo[0], hi[0], step), _axis(lo[1], hi[1], step)
        pts = [(np.array([xs[i], ys[j]]), v) for i, j, v in _grid_2d(problem, xs, ys, tol)]
    if refine_to is None:
        return [p for p, _ in pts]
    refined = [_refine(problem, p, step, refine_to, tol) for p, _ in pts]
    # zooming can stall on the jagged grid version of a curved boundary;
    # a continuous spot check weeds out those points
    refined = [p for p in refined if _is_local_min(problem, p, 1e-3, tol)]
    merged: list[np.ndarray] = []
    for p in sorted(refined, key=lambda q: float(problem.objective(q))):
        if all(np.linalg.norm(p - q) > 3 * step for q in merged):
            merged.append(p)
    return merged


def grid_minimum(problem: DCProblem, box, step: float, refine_to: float = 1e-7, tol: float = 1e-9):
    """Best feasible objective value found by the grid oracle: ``(x, F)``."""
    pts = grid_stationary_oracle(problem, box, step, tol, refine_to)
    vals = [float(problem.objective(p)) for p in pts]
    k = int(np.argmin(vals))
    return pts[k], vals[k]
