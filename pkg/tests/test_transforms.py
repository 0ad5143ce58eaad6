import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dcforge.errors import HasConstraints
from dcforge.problems import DCProblem, Domain, affine, get_instance, power_1d, quadratic
from dcforge.solvers import SolveConfig, inner_convex_solve
from dcforge.problems.functions import combine
from dcforge.transforms import lift, lift_basic, lift_convex_constrained, lift_dc_constrained

LIFTED = ["quartic1d", "quadratic_dc:2", "boxdc:1", "ring2d:v1", "ring2d:v2", "dcc:3"]
coords = st.floats(-2, 2, allow_nan=False)


def test_basic_lift_quartic():
    p = get_instance("quartic1d").problem
    lf = lift_basic(p)
    assert lf.lifted_dim == 2
    w = lf.embed([1.0])
    np.testing.assert_array_equal(w, [1.0, 1.0])
    assert float(lf.phi(w)) == 0.0 == float(p.objective(np.array([1.0])))
    assert not lf.membership(np.array([1.0, 0.5]))
    assert lf.membership(np.array([1.0, 1.5]))
    np.testing.assert_array_equal(lf.phi.grad(w), [-2.0, 1.0])


def test_lift_preconditions():
    ring = get_instance("ring2d:v1").problem
    with pytest.raises(HasConstraints):
        lift_basic(ring)
    with pytest.raises(HasConstraints):
        lift_convex_constrained(ring)
    with pytest.raises(ValueError):
        lift_dc_constrained(get_instance("quartic1d").problem)
    with pytest.raises(ValueError):
        lift_convex_constrained(get_instance("quartic1d").problem)
    with pytest.raises(ValueError):
        lift_basic(get_instance("boxdc:0").problem)


def test_lift_dispatch_kinds():
    assert lift(get_instance("quartic1d").problem).kind == "basic"
    assert lift(get_instance("boxdc:0").problem).kind == "convex_constrained"
    lf = lift(get_instance("ring2d:v1").problem)
    assert lf.kind == "dc_constrained"
    assert lf.lifted_dim == 2 + 1 + 1


def test_dc_lift_ring_origin():
    p = get_instance("ring2d:v1").problem
    lf = lift_dc_constrained(p)
    w = lf.embed([0.0, 0.0])
    np.testing.assert_array_equal(w, [0.0, 0.0, 0.0, 0.0])
    assert float(lf.psis[0](w)) == -1.0
    assert lf.phi.is_concave and lf.psis[0].is_concave


@pytest.mark.parametrize("name", LIFTED)
def test_lift_invariants_on_samples(name):
    p = get_instance(name).problem
    lf = lift(p)
    rng = np.random.default_rng(5)
    X = rng.uniform(-1, 1, (100, p.dim))
    if p.domain.kind != "whole_space":
        X = np.array([p.domain.project(x) for x in X])
    for x in X:
        w = lf.embed(x)
        x_back, t = lf.extract(w)
        np.testing.assert_array_equal(x_back, x)
        assert float(lf.phi(w)) == pytest.approx(float(p.objective(x)), abs=1e-12)
        assert lf.membership(w)
        assert lf.slackness(w) == 0.0
        lifted_ok = all(float(psi(w)) <= 1e-12 for psi in lf.psis)
        assert lifted_ok == p.is_feasible(x, 1e-12)
    # midpoint concavity of phi along pairs of lifted points
    for x, y in zip(X[:50], X[50:]):
        lift_t = np.concatenate([np.zeros(p.dim), np.full(lf.lifted_dim - p.dim, 0.3)])
        a, b = lf.embed(x) + lift_t, lf.embed(y)
        assert float(lf.phi(0.5 * (a + b))) >= 0.5 * float(lf.phi(a)) + 0.5 * float(lf.phi(b)) - 1e-12


def test_box_subproblem_example():
    # f = x^2, g = 2x on [0, 1]: the linearized subproblem min x^2 - 2x clamps to 1
    p = DCProblem(power_1d(2), affine([2.0]), Domain.box([0.0], [1.0]), (), [0.0])
    lf = lift_convex_constrained(p)
    w = lf.embed([0.0])
    s, rep = lf.linear_minimize(lf.phi.grad(w), x0=w)
    np.testing.assert_allclose(s, [1.0, 1.0], atol=1e-9)
    assert lf.membership(lf.embed([1.0]))


@pytest.mark.parametrize("seed", range(20))
def test_indicator_reduction_matches_lifted_solve(seed):
    # the lifted solve (with t) and the direct solve over the box give the same x
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((2, 2))
    f = quadratic(B.T @ B + 0.2 * np.eye(2), rng.standard_normal(2))
    g = quadratic(np.eye(2) * 0.5, rng.standard_normal(2))
    box = Domain.box([-1.0, -1.0], [1.0, 1.0])
    p = DCProblem(f, g, box, (), rng.uniform(-1, 1, 2))
    lf = lift_convex_constrained(p)
    w = lf.embed(p.x_init)
    c = lf.phi.grad(w)
    lifted, _ = lf.linear_minimize(c, x0=w, method="lifted")
    direct = inner_convex_solve(combine([(1.0, f)], linear=-g.grad(p.x_init)), box, (), x0=p.x_init).require().x_star
    np.testing.assert_allclose(lifted[:2], direct, atol=1e-6)


@settings(max_examples=25, deadline=None)
@given(arrays(float, 2, elements=coords))
def test_reduced_and_lifted_lmo_agree_on_dc_lift(x):
    p = get_instance("ring2d:v1").problem
    if not p.is_feasible(x, -1e-3):
        return
    lf = lift(p)
    w = lf.embed(x)
    c = lf.phi.grad(w)
    hs = lf.linearized_halfspaces(w)
    a, _ = lf.linear_minimize(c, hs, SolveConfig(), x0=w, method="reduced")
    b, _ = lf.linear_minimize(c, hs, SolveConfig(), x0=w, method="lifted")
    np.testing.assert_allclose(a, b, atol=1e-6)


@given(arrays(float, 1, elements=coords), st.floats(0.0, 3.0))
def test_membership_is_epigraph(x, dt):
    lf = lift_basic(get_instance("quartic1d").problem)
    fx = float(x[0] ** 4)
    assert lf.membership(np.array([x[0], fx + dt]))
    if dt > 1e-6:
        assert not lf.membership(np.array([x[0], fx - dt]))
