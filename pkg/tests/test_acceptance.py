"""End-to-end acceptance criteria, one test per criterion, at their stated tolerances."""

import time

import numpy as np
import pytest

from dcforge import analysis, cli
from dcforge.connections import run_demo
from dcforge.problems import Domain, get_instance, grid_stationary_oracle, negate, quadratic, reference_optimum
from dcforge.problems.zoo import grid_box
from dcforge.solvers import SolveConfig, StepRule, cccp_plus_solve, cccp_solve, fw_plus_solve, fw_solve
from dcforge.transforms import lift

UNIT = SolveConfig(eps_inner=1e-10, gap_tol=0.0, step_rule=StepRule("unit"))
PROP1 = ["quartic1d"] + [f"quadratic_dc:{s}" for s in range(10)]
PROP5 = ["ring2d:v1", "ring2d:v2"] + [f"dcc:{s}" for s in range(5)]


def _max_dev(direct, lifted, n):
    X = np.array(direct.iterates)
    W = np.array(lifted.iterates)[:, :n]
    return float(np.max(np.abs(X - W)))


def test_criterion_1_cccp_equals_fw_on_lift(acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    certified = True
    for name in PROP1:
        p = get_instance(name).problem
        cfg = UNIT.with_(max_outer_iters=50)
        a = cccp_solve(p, cfg)
        b = fw_solve(None, lift(p), cfg)
        assert a.n_iters == b.n_iters == 50
        worst = max(worst, _max_dev(a, b, p.dim))
        certified &= analysis.certify_equivalence(p, cfg, 50, tol=1e-8).passed
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and certified and elapsed < 5.0
    acceptance(1, ok, f"max deviation {worst:.2e}, {elapsed:.2f} s")
    assert worst <= 1e-8
    assert certified
    assert elapsed < 5.0


def test_criterion_2_cccp_plus_equals_fw_plus_on_lift(acceptance):
    t0 = time.perf_counter()
    worst = worst_feas = -np.inf
    for name in PROP5:
        p = get_instance(name).problem
        cfg = UNIT.with_(max_outer_iters=30)
        a = cccp_plus_solve(p, cfg)
        b = fw_plus_solve(None, lift(p), None, cfg)
        worst = max(worst, _max_dev(a, b, p.dim))
        for tr in (a, b):
            for w in tr.iterates:
                worst_feas = max(worst_feas, float(np.max(p.constraint_values(w[: p.dim]))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and worst_feas <= 1e-6 and elapsed < 10.0
    acceptance(2, ok, f"max deviation {worst:.2e}, worst constraint {worst_feas:.2e}, {elapsed:.2f} s")
    assert worst <= 1e-6
    assert worst_feas <= 1e-6
    assert elapsed < 10.0


def test_criterion_3_corollary2_rate(acceptance):
    violations = 0
    quartic_gap = None
    for name in PROP1:
        inst = get_instance(name)
        tr = cccp_solve(inst.problem, SolveConfig(max_outer_iters=1000))
        F1 = float(inst.problem.objective(inst.problem.x_init))
        if name == "quartic1d":
            quartic_gap = F1 - inst.F_star
        k = np.arange(1, tr.n_iters + 1)
        running = np.minimum.accumulate(np.array(tr.dc_gap))
        violations += int(np.sum(running > (F1 - inst.F_star) / k))
        assert tr.n_iters == 1000
    ok = violations == 0 and abs(quartic_gap - 0.25) < 1e-15
    acceptance(3, ok, f"{violations} violations over {len(PROP1)} instances")
    assert quartic_gap == 0.25
    assert violations == 0


def test_criterion_4_theorem3_rate_and_feasibility(acceptance):
    violations = 0
    worst_psi = -np.inf
    for s in range(5):
        name = f"fwplus_concave:{s}"
        form = get_instance(name).fw_form
        phi_star = reference_optimum(name)[1]
        tr = fw_plus_solve(form.phi, form.domain, form.psis, SolveConfig(max_outer_iters=500), form.omega1)
        assert tr.meta["mode"] == "concave" and tr.n_iters == 500
        k = np.arange(1, 501)
        running = np.minimum.accumulate(np.array(tr.fw_gap))
        violations += int(np.sum(running > (tr.meta["phi1"] - phi_star) / k))
        worst_psi = max(worst_psi, max(float(psi(w)) for w in tr.iterates[1:] for psi in form.psis))
    ok = violations == 0 and worst_psi <= 1e-6
    acceptance(4, ok, f"{violations} rate violations, worst psi {worst_psi:.2e}")
    assert violations == 0
    assert worst_psi <= 1e-6


def test_criterion_5_convex_fw_plus_bounds(acceptance):
    inst = get_instance("fwplus_convex_box")
    form = inst.fw_form
    tr = fw_plus_solve(form.phi, form.domain, form.psis, SolveConfig(max_outer_iters=1000), form.omega1)
    assert tr.meta["mode"] == "convex" and tr.n_iters == 1000
    # L_phi = 1, L_psi = 2, D^2 = |(4, 4)|^2 = 32 on [-2, 2]^2
    C_phi, C_psi = 1.0 * 32.0, 2.0 * 32.0
    assert analysis.curvature_upper_bound(form.phi, form.domain) == pytest.approx(C_phi, rel=1e-12)
    assert analysis.curvature_upper_bound(form.psis[0], form.domain) == pytest.approx(C_psi, rel=1e-12)
    k = np.arange(1, 1001)
    W = np.array(tr.iterates[:1000])
    phi_gap = np.array([float(form.phi(w)) for w in W]) - form.phi_star
    psi_val = np.array([float(form.psis[0](w)) for w in W])
    bad_phi = int(np.sum(phi_gap > 2 * C_phi / (k + 1)))
    bad_psi = int(np.sum(psi_val > 2 * C_psi / (k + 1)))
    acceptance(5, bad_phi == bad_psi == 0, f"{bad_phi} phi and {bad_psi} psi violations over 1000 iterations")
    assert bad_phi == 0
    assert bad_psi == 0


def test_criterion_6_kkt_and_slackness(acceptance):
    worst_kkt = worst_slack = 0.0
    for name in PROP1 + ["fequalg"]:
        p = get_instance(name).problem
        cfg = UNIT.with_(max_outer_iters=50)
        tr = cccp_solve(p, cfg)
        X = tr.iterates
        for k in range(tr.n_iters):
            worst_kkt = max(worst_kkt, float(np.linalg.norm(p.f.grad(X[k + 1]) - p.g.grad(X[k]))))
        lf = lift(p)
        fw = fw_solve(None, lf, cfg)
        for w in fw.iterates:
            worst_slack = max(worst_slack, abs(float(w[p.dim]) - float(p.f(w[: p.dim]))))
    ok = worst_kkt <= 1e-8 and worst_slack <= 1e-8
    acceptance(6, ok, f"KKT {worst_kkt:.2e}, |t_k - f(x_k)| {worst_slack:.2e}")
    assert worst_kkt <= 1e-8
    assert worst_slack <= 1e-8


def test_criterion_7_constraint_reductions(acceptance):
    results = {name: run_demo(name) for name in ("ppm", "mirror", "proxgrad", "dualprox", "fwascccp")}
    all_pass = all(r.passed for rs in results.values() for r in rs)
    gd = results["mirror"][0]
    gd_dev = gd.extra["gradient_descent_deviation"]
    soft = results["proxgrad"][0]
    fixed_point = float(soft.fw_iterates[-1][0])
    relation = results["dualprox"][0].extra["relation_residual"]
    fwcccp = results["fwascccp"][0].max_deviation
    ok = all_pass and gd_dev <= 1e-15 and abs(fixed_point - 1.0) <= 1e-9 and relation <= 1e-10 and fwcccp == 0.0
    acceptance(7, ok, f"GD {gd_dev:.1e}, soft-threshold limit {fixed_point:.12f}, relation {relation:.1e}")
    assert all_pass
    assert gd_dev <= 1e-15
    assert abs(fixed_point - 1.0) <= 1e-9
    assert relation <= 1e-10
    assert fwcccp == 0.0


def _curvature_instances():
    rng = np.random.default_rng(8)
    domains = [
        Domain.box([-1.0, -2.0, 0.0], [1.0, 0.5, 3.0]),
        Domain.simplex(3),
        Domain.l2_ball([0.5, -0.5, 1.0], 1.5),
        Domain.vertex_polytope([[0, 0, 0], [1, 0, 0], [0, 2, 0], [0, 0, 1], [1, 1, 1]]),
        Domain.simplex(3, radius=2.0),
    ]
    out = []
    for i in range(10):
        B = rng.standard_normal((3, 3))
        fn = quadratic(B.T @ B + 0.1 * np.eye(3), rng.standard_normal(3))
        dom = domains[i % len(domains)]
        out.append((fn, dom))
        out.append((negate(fn), dom))
    return out


def test_criterion_8_curvature(acceptance):
    worst_concave = -np.inf
    worst_excess = -np.inf
    instances = _curvature_instances()
    assert len(instances) == 20
    for fn, dom in instances:
        est = analysis.estimate_curvature(fn, dom, n_pairs=200, n_etas=10)
        upper = analysis.curvature_upper_bound(fn, dom)
        assert est.analytic_upper_bound == upper
        worst_excess = max(worst_excess, est.sampled_lower_bound - upper)
        if fn.is_concave:
            worst_concave = max(worst_concave, est.sampled_lower_bound)
    ok = worst_concave <= 1e-9 and worst_excess <= 1e-9
    acceptance(8, ok, f"concave max {worst_concave:.2e}, max(sampled - L D^2) {worst_excess:.2e}")
    assert worst_concave <= 1e-9
    assert worst_excess <= 1e-9


_DIRS = [np.array([np.cos(a), np.sin(a)]) for a in np.arange(8) * np.pi / 4]


def _perturbed(p, x, box):
    """The feasible point at distance 1 (or 0.5 near corners) with the largest objective."""
    lo, hi = (np.asarray(v) for v in box)
    for r in (1.0, 0.5):
        cand = [x + r * d for d in _DIRS]
        cand = [y for y in cand if p.is_feasible(y, -1e-9) and np.all(y >= lo) and np.all(y <= hi)]
        if cand:
            return max(cand, key=lambda y: float(p.objective(y)))
    raise AssertionError("no feasible perturbation")


def test_criterion_9_stationarity_at_oracle_points(acceptance):
    names = ["ring2d:v1", "ring2d:v2"] + [f"dcc:{s}" for s in range(5)] + [f"fwplus_concave:{s}" for s in range(2)]
    worst_stationary, worst_perturbed, n_points = np.inf, -np.inf, 0
    for name in names:
        p = get_instance(name).problem
        box = grid_box(name)
        pts = grid_stationary_oracle(p, box, 0.02, refine_to=1e-7)
        assert pts, name
        for x in pts:
            n_points += 1
            worst_stationary = min(worst_stationary, analysis.check_stationarity(p, x, tol=1e-4).worst_margin)
            y = _perturbed(p, x, box)
            worst_perturbed = max(worst_perturbed, analysis.check_stationarity(p, y, tol=1e-4).worst_margin)
    ok = worst_stationary >= -1e-4 and worst_perturbed <= -0.1
    acceptance(9, ok, f"{n_points} oracle points: worst {worst_stationary:.2e}; perturbed best {worst_perturbed:.3f}")
    assert worst_stationary >= -1e-4
    assert worst_perturbed <= -0.1


def test_criterion_10_deterministic_trace(acceptance, tmp_path):
    cfg = tmp_path / "det.cfg"
    cfg.write_text("instance = quadratic_dc\nalgorithm = fw\nmax_outer_iters = 40\ncertificates = kkt\n")
    codes = []
    for run in ("a", "b"):
        codes.append(cli.main(["run", str(cfg), "--seed", "4", "--out", str(tmp_path / run)]))
    a = (tmp_path / "a" / "trace.csv").read_bytes()
    b = (tmp_path / "b" / "trace.csv").read_bytes()
    ok = codes == [0, 0] and a == b and len(a.splitlines()) == 41
    acceptance(10, ok, f"{len(a)} bytes, exit codes {codes}")
    assert codes == [0, 0]
    assert a == b
    assert len(a.splitlines()) == 41
