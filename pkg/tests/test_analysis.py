import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dcforge import analysis
from dcforge.analysis import Certificate, CurvatureEstimate
from dcforge.errors import InfeasiblePoint, UnboundedDomain
from dcforge.problems import Domain, affine, get_instance, negate, squared_distance
from dcforge.problems.functions import combine, power_1d
from dcforge.solvers import SolveConfig, StepRule, cccp_solve, fw_solve
from dcforge.transforms import lift


def test_dc_gap_quartic_first_step():
    p = get_instance("quartic1d").problem
    x2 = 0.5 ** (1 / 3)
    expected = 1 - x2**4 - 2 * (1 - x2)
    assert expected == pytest.approx(0.190551, abs=1e-6)
    assert analysis.dc_gap(p, [1.0], [x2]) == pytest.approx(expected, abs=1e-15)


def test_fw_gap_linear_simplex():
    assert analysis.fw_gap(affine([3.0, 1.0, 2.0]), Domain.simplex(3), [1.0, 0.0, 0.0]) == 2.0


def test_fw_gap_on_lift_equals_dc_gap():
    p = get_instance("quadratic_dc:4").problem
    lf = lift(p)
    tr = cccp_solve(p, SolveConfig(max_outer_iters=3))
    for x, g in zip(tr.iterates, tr.dc_gap):
        assert analysis.fw_gap(lf.phi, lf, lf.embed(x)) == pytest.approx(g, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(arrays(float, 3, elements=st.floats(-2, 2)), arrays(float, 3, elements=st.floats(0, 1)))
def test_fw_gap_nonnegative(c, w):
    simplex = Domain.simplex(3)
    w = simplex.project(w)
    phi = combine([(1.0, squared_distance(c, 1.0))])
    assert analysis.fw_gap(phi, simplex, w) >= -10 * SolveConfig().eps_inner
    box = Domain.box([-1] * 3, [1] * 3)
    assert analysis.fw_gap(negate(phi), box, np.clip(c, -1, 1)) >= -10 * SolveConfig().eps_inner


def test_curvature_half_square_on_interval():
    est = analysis.estimate_curvature(squared_distance([0.0], 1.0), Domain.box([0.0], [1.0]))
    assert isinstance(est, CurvatureEstimate)
    assert est.sampled_lower_bound == pytest.approx(1.0, abs=0.05)
    assert est.sampled_lower_bound <= est.analytic_upper_bound == 1.0


def test_curvature_concave_is_nonpositive():
    est = analysis.estimate_curvature(negate(squared_distance([0.2, 0.1], 1.0)), Domain.box([-1, -1], [1, 1]))
    assert est.sampled_lower_bound <= 1e-12


def test_curvature_simplex_bound():
    phi = squared_distance(np.zeros(3), 1.0)
    est = analysis.estimate_curvature(phi, Domain.simplex(3))
    assert est.sampled_lower_bound <= analysis.curvature_upper_bound(phi, Domain.simplex(3)) == pytest.approx(2.0)


def test_curvature_unbounded_domain():
    with pytest.raises(UnboundedDomain):
        analysis.estimate_curvature(power_1d(4), Domain.whole_space(1))
    with pytest.raises(UnboundedDomain):
        analysis.curvature_upper_bound(squared_distance([0.0], 1.0), Domain.whole_space(1))
    with pytest.raises(ValueError):
        analysis.curvature_upper_bound(power_1d(4), Domain.box([0.0], [1.0]))


def test_stationarity_quartic():
    p = get_instance("quartic1d").problem
    c = analysis.check_stationarity(p, [1 / np.sqrt(2)])
    assert c.passed and abs(c.worst_margin) <= 1e-9
    c = analysis.check_stationarity(p, [1.0])
    assert not c.passed
    assert c.worst_margin == pytest.approx(-0.190551, abs=1e-6)


def test_stationarity_tuple_target_and_infeasible():
    box = Domain.box([-1, -1], [1, 1])
    phi = negate(squared_distance([0.0, 0.0], 1.0))
    assert analysis.check_stationarity((phi, box, ()), [1.0, 1.0]).passed
    assert not analysis.check_stationarity((phi, box, ()), [0.5, 0.0]).passed
    with pytest.raises(InfeasiblePoint):
        analysis.check_stationarity((phi, box, ()), [2.0, 0.0])
    with pytest.raises(InfeasiblePoint):
        analysis.check_stationarity(get_instance("ring2d:v1").problem, [5.0, 5.0])


def test_certify_rates_quartic():
    inst = get_instance("quartic1d")
    tr = cccp_solve(inst.problem, SolveConfig(max_outer_iters=100))
    c = analysis.certify_rates(tr, inst.F_star, "corollary2_rate")
    assert c.passed and c.kind == "corollary2_rate"
    assert len(c.records) == 100
    assert c.records[3].bound_rhs == pytest.approx(0.25 / 4)
    assert analysis.certify_rates(tr, None, "corollary2_rate").kind == "not_applicable"
    with pytest.raises(ValueError):
        analysis.certify_rates(tr, inst.F_star, "kkt")


def test_certify_rates_uses_other_gap_column():
    # FW on the lift records fw gaps only; the dc-gap kind falls back to them
    inst = get_instance("quartic1d")
    lf = lift(inst.problem)
    tr = fw_solve(None, lf, SolveConfig(max_outer_iters=30, step_rule=StepRule("unit")))
    assert analysis.certify_rates(tr, inst.F_star, "corollary2_rate").passed
    assert analysis.certify_rates(tr, inst.F_star, "lemma1_rate").passed


def test_certify_convex_rates():
    phi = squared_distance([0.6, 0.3, 0.1], 1.0)
    tr = fw_solve(phi, Domain.simplex(3), SolveConfig(max_outer_iters=200, step_rule=StepRule("harmonic")))
    C = analysis.curvature_upper_bound(phi, Domain.simplex(3))
    assert analysis.certify_rates(tr, 0.0, "appendix_convex_phi", curvature=C).passed
    # an optimum that is too low by 1 breaks the bound after a few steps
    assert not analysis.certify_rates(tr, -1.0, "appendix_convex_phi", curvature=C).passed
    assert analysis.certify_rates(tr, 0.0, "appendix_convex_psi").kind == "not_applicable"


def test_certify_kkt():
    tr = cccp_solve(get_instance("quartic1d").problem, SolveConfig(max_outer_iters=20))
    assert analysis.certify_kkt(tr).passed
    tr.kkt_residual[4] = 1e-3
    c = analysis.certify_kkt(tr)
    assert not c.passed and c.worst_margin == -1e-3


@pytest.mark.parametrize("name", ["quartic1d", "fequalg", "quadratic_dc:1", "ring2d:v1"])
def test_certify_equivalence(name):
    c = analysis.certify_equivalence(get_instance(name).problem, K=20)
    assert c.passed, c.details


def test_certificate_line_and_kind_validation():
    c = Certificate("kkt", True, 0.0)
    assert c.line() == "kkt PASS 0"
    assert analysis._cert("kkt", -0.0, 0.0).line() == "kkt PASS 0"
    with pytest.raises(ValueError):
        analysis._cert("made_up", 0.0, 0.0)


@pytest.mark.parametrize("name", ["quartic1d", "quadratic_dc:0", "quadratic_dc:7", "boxdc:1"])
def test_dc_gap_bounded_by_objective_drop(name):
    # f(x_k) - g(x_k) - f(x_{k+1}) + g(x_{k+1}) >= dc_gap, since g lies above its tangent
    p = get_instance(name).problem
    tr = cccp_solve(p, SolveConfig(max_outer_iters=30))
    for x, xn, g in zip(tr.iterates, tr.iterates[1:], tr.dc_gap):
        drop = float(p.objective(x)) - float(p.objective(xn))
        assert g >= -10 * SolveConfig().eps_inner
        assert drop >= g - 10 * SolveConfig().eps_inner


@pytest.mark.parametrize("name", ["quartic1d", "quadratic_dc:2"])
def test_running_min_gap_chain(name):
    # min_{j<=k} gap_j <= (F_1 - F_{k+1}) / k <= (F_1 - F*) / k
    inst = get_instance(name)
    tr = cccp_solve(inst.problem, SolveConfig(max_outer_iters=50))
    F = [float(inst.problem.objective(x)) for x in tr.iterates]
    mins = tr.running_min_gap()
    for k in range(1, 51):
        assert mins[k - 1] <= (F[0] - F[k]) / k + 1e-9
        assert (F[0] - F[k]) / k <= (F[0] - inst.F_star) / k + 1e-9
