"""Named benchmark instances, addressable by string from the CLI.

=====================  ====================================================
name                   instance
=====================  ====================================================
quartic1d              x^4 - x^2 on R
quadratic_dc:<seed>    random quadratic DC on R^n, A - C positive definite
ring2d:v1, ring2d:v2   2-D DC-constrained instances
dcc:<seed>             2-D quadratic DC with a ball and a hole constraint
boxdc:<seed>           quadratic DC over a box (convex-constrained CCCP)
fequalg                f = g, every point stationary
fwplus_convex_box      convex-mode FW+ instance on [-2, 2]^2
fwplus_concave:<seed>  concave-mode FW+ instance on [-1, 1]^2
=====================  ====================================================
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..rng import LCG64
from .dc import (
    BenchmarkInstance,
    DCProblem,
    FWForm,
    fequalg_instance,
    make_quartic_dc_1d,
    make_ring_constrained_dc_2d,
    quadratic_dc_instance,
)
from .domains import Domain
from .functions import combine, constant, quadratic, squared_distance
from .oracle import grid_minimum

GRID_BOXES = {
    "ring2d:v1": ([-3.0, -3.0], [3.0, 3.0]),
    "ring2d:v2": ([-3.0, -3.0], [3.0, 3.0]),
    "dcc": ([-2.1, -2.1], [2.1, 2.1]),
    "fwplus_concave": ([-1.0, -1.0], [1.0, 1.0]),
}


def _sym(M):
    return 0.5 * (M + M.T)


def seeded_quadratic_dc(seed: int) -> BenchmarkInstance:
    rng = LCG64(seed)
    n = 2 + seed % 4
    B = rng.normal_array((n, n))
    N = rng.normal_array((n, n))
    C = _sym(N.T @ N / n)
    A = _sym(C + B.T @ B / n + 0.5 * np.eye(n))
    b = rng.uniform_array(n, -1, 1)
    d = rng.uniform_array(n, -1, 1)
    x0 = rng.uniform_array(n, -2, 2)
    return quadratic_dc_instance(A, b, C, d, x_init=x0, name=f"quadratic_dc:{seed}")


def seeded_box_dc(seed: int) -> BenchmarkInstance:
    rng = LCG64(10_000 + seed)
    n = 2 + seed % 3
    B = rng.normal_array((n, n))
    N = rng.normal_array((n, n))
    A = _sym(B.T @ B / n + 0.5 * np.eye(n))
    C = _sym(1.5 * N.T @ N / n)
    b = rng.uniform_array(n, -1, 1)
    d = rng.uniform_array(n, -1, 1)
    box = Domain.box(-np.ones(n), np.ones(n))
    x0 = rng.uniform_array(n, -1, 1)
    p = DCProblem(quadratic(A, b, name="f"), quadratic(C, d, name="g"), box, (), x0, f"boxdc:{seed}")
    return BenchmarkInstance(p.name, p)


def seeded_dc_constrained(seed: int) -> BenchmarkInstance:
    rng = LCG64(20_000 + seed)
    B = rng.normal_array((2, 2))
    N = rng.normal_array((2, 2))
    A = _sym(B.T @ B / 2 + 0.5 * np.eye(2))
    C = _sym(N.T @ N / 2)
    b = rng.uniform_array(2, -1, 1)
    a = rng.uniform_array(2, -1, 1)
    r = rng.uniform(0.3, 0.7)
    while True:
        x0 = rng.uniform_array(2, -1.8, 1.8)
        if x0 @ x0 <= 3.9 and (x0 - a) @ (x0 - a) >= r * r + 0.1:
            break
    ball = (squared_distance(np.zeros(2), 2.0, name="||x||^2"), constant(2, 4.0, name="4"))
    hole = (constant(2, r * r, name="r^2"), squared_distance(a, 2.0, name="||x-a||^2"))
    p = DCProblem(quadratic(A, b, name="f0"), quadratic(C, None, name="g0"), Domain.whole_space(2), (ball, hole), x0, f"dcc:{seed}")
    return BenchmarkInstance(p.name, p, provenance="grid_oracle", meta={"hole": (a, r)})


def fwplus_convex_box() -> BenchmarkInstance:
    """phi = 0.5||w||^2, psi = ||w||^2 - 1 over [-2, 2]^2 from w1 = (2, 2)."""
    box = Domain.box([-2.0, -2.0], [2.0, 2.0])
    phi = squared_distance(np.zeros(2), 1.0, name="0.5||w||^2")
    psi = quadratic(2 * np.eye(2), np.zeros(2), -1.0, name="||w||^2-1")
    p = DCProblem(phi, constant(2, 0.0), box, ((squared_distance(np.zeros(2), 2.0), constant(2, 1.0)),), [0.0, 0.0], "fwplus_convex_box")
    form = FWForm(phi, box, (psi,), np.array([2.0, 2.0]), phi_star=0.0)
    return BenchmarkInstance(p.name, p, (np.zeros(2), 0.0), [np.zeros(2)], "analytic", fw_form=form)


def seeded_fwplus_concave(seed: int) -> BenchmarkInstance:
    """phi = -0.5||w - c||^2, psi = r^2 - ||w - a||^2 over [-1, 1]^2."""
    rng = LCG64(30_000 + seed)
    c = rng.uniform_array(2, -0.5, 0.5)
    a = rng.uniform_array(2, -0.5, 0.5)
    r = rng.uniform(0.2, 0.4)
    while True:
        w1 = rng.uniform_array(2, -0.9, 0.9)
        if (w1 - a) @ (w1 - a) >= r * r + 0.05:
            break
    box = Domain.box([-1.0, -1.0], [1.0, 1.0])
    f, g = constant(2, 0.0, name="0"), squared_distance(c, 1.0, name="0.5||w-c||^2")
    f1, g1 = constant(2, r * r, name="r^2"), squared_distance(a, 2.0, name="||w-a||^2")
    p = DCProblem(f, g, box, ((f1, g1),), w1, f"fwplus_concave:{seed}")
    phi = combine([(1.0, f), (-1.0, g)], name="phi")
    psi = combine([(1.0, f1), (-1.0, g1)], name="psi")
    form = FWForm(phi, box, (psi,), w1.copy())
    return BenchmarkInstance(p.name, p, provenance="grid_oracle", fw_form=form)


def get_instance(name: str) -> BenchmarkInstance:
    base, _, arg = name.partition(":")
    if base == "quartic1d":
        return make_quartic_dc_1d()
    if base == "ring2d":
        return make_ring_constrained_dc_2d(arg or "v1")
    if base == "fequalg":
        return fequalg_instance()
    if base == "fwplus_convex_box":
        return fwplus_convex_box()
    seeded = {
        "quadratic_dc": seeded_quadratic_dc,
        "boxdc": seeded_box_dc,
        "dcc": seeded_dc_constrained,
        "fwplus_concave": seeded_fwplus_concave,
    }
    if base in seeded:
        try:
            seed = int(arg)
        except ValueError:
            raise KeyError(f"instance {name!r} needs an integer seed") from None
        return seeded[base](seed)
    raise KeyError(f"unknown instance {name!r}")


def grid_box(name: str):
    return GRID_BOXES.get(name) or GRID_BOXES.get(name.partition(":")[0])


@lru_cache(maxsize=64)
def reference_optimum(name: str, step: float = 0.01) -> tuple[np.ndarray, float, str]:
    """``(x_star, F_star, provenance)``: analytic when known, else grid oracle."""
    inst = get_instance(name)
    if inst.known_optimum is not None:
        x, F = inst.known_optimum
        return x, F, "analytic"
    box = grid_box(name)
    if box is None or inst.problem.dim > 2:
        raise KeyError(f"no reference optimum available for {name!r}")
    x, F = grid_minimum(inst.problem, box, step)
    return x, F, "grid_oracle"
