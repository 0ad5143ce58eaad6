"""Command-line runner: ``dcforge run|verify|report|demo``.

Run configs are flat text files, one ``key = value`` per line, ``#`` starts
a comment.  Recognized keys:

    instance          zoo name, e.g. quartic1d, quadratic_dc:3, ring2d:v1
    algorithm         fw | fw_plus | cccp | cccp_plus
    certificates      comma-separated certificate kinds (may be empty)
    output_dir        directory for trace.csv and friends (default: out)
    seed              seed for a seeded family named without one (quadratic_dc)
    record_time       true to fill the wall_ms column (breaks byte-identity)
    lmo_method        reduced | lifted
    max_outer_iters, gap_tol, eps_inner, inner_max_iters, step_rule,
    barrier_mu0, barrier_shrink, unbounded_norm_threshold, inner_method

Exit codes: 0 success, 1 certificate failure, 2 config or input error,
3 solver error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import analysis
from .connections import DEMOS, run_demo
from .errors import ConfigError, DCForgeError
from .problems.zoo import get_instance, reference_optimum
from .solvers import SolveConfig, StepRule, cccp_plus_solve, cccp_solve, fw_plus_solve, fw_solve
from .solvers.trace import COLUMNS, IterateTrace
from .transforms import lift

log = logging.getLogger("dcforge")

EXIT_OK, EXIT_CERT, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
ALGORITHMS = ("fw", "fw_plus", "cccp", "cccp_plus")
SEEDED_FAMILIES = ("quadratic_dc", "boxdc", "dcc", "fwplus_concave")
LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "trace": logging.DEBUG}


@dataclass
class RunConfig:
    instance: str
    algorithm: str
    solve: SolveConfig = SolveConfig()
    certificates: list[str] = field(default_factory=list)
    output_dir: Path = Path("out")
    seed: int | None = None
    record_time: bool = False
    lmo_method: str = "reduced"

    @property
    def instance_name(self) -> str:
        base, sep, arg = self.instance.partition(":")
        if base in SEEDED_FAMILIES and not sep:
            if self.seed is None:
                raise ConfigError(f"instance {base!r} needs a seed (name it {base}:<seed> or set seed)")
            return f"{base}:{self.seed}"
        return self.instance


# ---------------------------------------------------------------------------
# config parsing

_SOLVE_KEYS = {f.name: f.type for f in fields(SolveConfig)}


def _parse_bool(v: str) -> bool:
    low = v.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {v!r}")


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        key = key.strip()
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def build_run_config(kv: dict[str, str]) -> RunConfig:
    kv = dict(kv)
    try:
        instance = kv.pop("instance")
        algorithm = kv.pop("algorithm")
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r}") from None
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    certs = [c.strip() for c in kv.pop("certificates", "").split(",") if c.strip()]
    for c in certs:
        if c not in analysis.CERT_KINDS or c == "not_applicable":
            raise ConfigError(f"unknown certificate kind {c!r}")
    output_dir = Path(kv.pop("output_dir", "out"))
    try:
        seed = int(kv.pop("seed")) if "seed" in kv else None
        record_time = _parse_bool(kv.pop("record_time", "false"))
        lmo_method = kv.pop("lmo_method", "reduced")
        if lmo_method not in ("reduced", "lifted"):
            raise ConfigError(f"lmo_method must be reduced or lifted, got {lmo_method!r}")
        solve_kw: dict = {}
        if "max_iters" in kv:
            kv["max_outer_iters"] = kv.pop("max_iters")
        for key, value in kv.items():
            if key == "step_rule":
                solve_kw[key] = StepRule(value)
            elif key == "inner_method":
                solve_kw[key] = None if value in ("", "auto") else value
            elif key in ("max_outer_iters", "inner_max_iters"):
                solve_kw[key] = int(value)
            elif key in _SOLVE_KEYS:
                solve_kw[key] = float(value)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        solve = SolveConfig(**solve_kw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(instance, algorithm, solve, certs, output_dir, seed, record_time, lmo_method)


def load_run_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return build_run_config(parse_config_text(text))


# ---------------------------------------------------------------------------
# run


def _resolve(rc: RunConfig):
    """Instance plus a zero-argument solver closure; raises ConfigError on incompatibility."""
    name = rc.instance_name
    try:
        inst = get_instance(name)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"cannot resolve instance {name!r}: {exc}") from None
    p = inst.problem
    form = inst.fw_form
    cfg = rc.solve
    if rc.algorithm == "cccp":
        if p.constraints:
            raise ConfigError(f"cccp needs an instance without DC constraints; {name} has {p.m} (use cccp_plus)")
        return inst, lambda: cccp_solve(p, cfg)
    if rc.algorithm == "cccp_plus":
        if not p.constraints:
            raise ConfigError(f"cccp_plus needs DC constraints; {name} has none (use cccp)")
        return inst, lambda: cccp_plus_solve(p, cfg)
    if rc.algorithm == "fw":
        if p.constraints:
            raise ConfigError(f"fw needs an instance without DC constraints; {name} has {p.m} (use fw_plus)")
        return inst, lambda: fw_solve(None, lift(p), cfg, lmo_method=rc.lmo_method)
    if form is not None:
        return inst, lambda: fw_plus_solve(form.phi, form.domain, form.psis, cfg, form.omega1)
    if not p.constraints:
        raise ConfigError(f"fw_plus needs DC constraints or an FW+ form; {name} has neither (use fw)")
    return inst, lambda: fw_plus_solve(None, lift(p), None, cfg, lmo_method=rc.lmo_method)


def _fmt(v) -> str:
    return "" if v is None else "%.17g" % v


def write_trace_csv(trace: IterateTrace, path: Path, record_time: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in trace.rows():
            if not record_time:
                row["wall_ms"] = None
            w.writerow([str(row["k"])] + [_fmt(row[c]) if c != "inner_iters" else str(row[c]) for c in COLUMNS[1:]])


def _f_star(rc: RunConfig, inst) -> tuple[float | None, str]:
    """Reference optimum and where it came from (analytic, grid_oracle or unknown)."""
    if inst.fw_form is not None and inst.fw_form.phi_star is not None:
        return inst.fw_form.phi_star, "analytic"
    try:
        _, F, prov = reference_optimum(rc.instance_name)
    except KeyError:
        return None, "unknown"
    return F, prov


def _certificates(rc: RunConfig, inst, trace: IterateTrace, F_star) -> list[analysis.Certificate]:
    out = []
    form = inst.fw_form
    for kind in rc.certificates:
        if kind in analysis.FW_GAP_KINDS + analysis.DC_GAP_KINDS:
            out.append(analysis.certify_rates(trace, F_star, kind, eps_inner=rc.solve.eps_inner))
        elif kind in ("appendix_convex_phi", "appendix_convex_psi"):
            if form is None or rc.algorithm != "fw_plus":
                out.append(analysis.Certificate("not_applicable", True, 0.0, f"{kind}: needs an FW+ form"))
                continue
            if kind == "appendix_convex_phi":
                C = analysis.curvature_upper_bound(form.phi, form.domain)
                out.append(analysis.certify_rates(trace, F_star, kind, eps_inner=rc.solve.eps_inner, curvature=C))
            else:
                C = max(analysis.curvature_upper_bound(psi, form.domain) for psi in form.psis)
                out.append(analysis.certify_rates(trace, None, kind, eps_inner=rc.solve.eps_inner, curvature=C, psis=form.psis))
        elif kind == "equivalence":
            out.append(analysis.certify_equivalence(inst.problem, rc.solve, trace.n_iters, lmo_method=rc.lmo_method))
        elif kind == "kkt":
            out.append(analysis.certify_kkt(trace))
        elif kind == "stationarity":
            if form is not None and rc.algorithm == "fw_plus":
                target = (form.phi, form.domain, form.psis)
                point = trace.final
            else:
                target = inst.problem
                point = trace.final[: inst.problem.dim]
            out.append(analysis.check_stationarity(target, point, config=rc.solve))
    return out


def run(config_path, *, max_iters=None, gap_tol=None, seed=None, out=None) -> int:
    try:
        rc = load_run_config(config_path)
        over = {}
        if max_iters is not None:
            over["max_outer_iters"] = max_iters
        if gap_tol is not None:
            over["gap_tol"] = gap_tol
        if over:
            rc.solve = rc.solve.with_(**over)
        if seed is not None:
            rc.seed = seed
        if out is not None:
            rc.output_dir = Path(out)
        inst, solve = _resolve(rc)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("run %s with %s", rc.instance_name, rc.algorithm)
    try:
        trace = solve()
        F_star, provenance = _f_star(rc, inst)
        certs = _certificates(rc, inst, trace, F_star)
        if provenance == "grid_oracle":
            for c in certs:
                if c.kind in analysis.FW_GAP_KINDS + analysis.DC_GAP_KINDS:
                    c.details += " (oracle-relative)"
    except DCForgeError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    rc.output_dir.mkdir(parents=True, exist_ok=True)
    write_trace_csv(trace, rc.output_dir / "trace.csv", rc.record_time)
    (rc.output_dir / "certificates.txt").write_text("".join(c.line() + "\n" for c in certs))
    meta = [
        ("instance", rc.instance_name),
        ("algorithm", rc.algorithm),
        ("n_iters", str(trace.n_iters)),
        ("stopped", trace.stopped),
        ("phi1", _fmt(trace.meta.get("phi1"))),
        ("F_star", _fmt(F_star)),
        ("F_star_provenance", provenance),
        ("final", " ".join(_fmt(v) for v in trace.final)),
    ]
    (rc.output_dir / "run_meta.txt").write_text("".join(f"{k} = {v}\n" for k, v in meta))
    for c in certs:
        print(f"{c.line()}  {c.details}")
    print(f"{trace.n_iters} iterations ({trace.stopped}); trace written to {rc.output_dir / 'trace.csv'}")
    return EXIT_OK if all(c.passed for c in certs) else EXIT_CERT


# ---------------------------------------------------------------------------
# report


def _read_meta(path: Path) -> dict[str, str]:
    if not path.exists():
        return {}
    return parse_config_text(path.read_text())


def read_trace_csv(path: Path) -> dict[str, np.ndarray]:
    """Columns as float arrays (empty fields become NaN); raises ValueError if corrupt."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise ValueError("missing or unexpected header")
    body = rows[1:]
    if not body:
        raise ValueError("trace has no rows")
    if any(len(r) != len(COLUMNS) for r in body):
        raise ValueError("ragged rows")
    data = np.array([[float(v) if v != "" else np.nan for v in r] for r in body])
    return {c: data[:, i] for i, c in enumerate(COLUMNS)}


def report(trace_dir) -> int:
    d = Path(trace_dir)
    try:
        cols = read_trace_csv(d / "trace.csv")
        meta = _read_meta(d / "run_meta.txt")
    except (OSError, ValueError, ConfigError) as exc:
        print(f"cannot read trace in {d}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    k = cols["k"]
    gaps = cols["fw_gap"] if not np.all(np.isnan(cols["fw_gap"])) else cols["dc_gap"]
    if np.all(np.isnan(gaps)):
        print("trace has no gap column", file=sys.stderr)
        return EXIT_CONFIG
    min_gap = np.fmin.accumulate(gaps)
    tau = int(np.nanargmin(gaps)) + 1
    F_star = float(meta["F_star"]) if meta.get("F_star") else None
    phi1 = cols["objective"][0]
    bound = (phi1 - F_star) / k if F_star is not None else np.full_like(k, np.nan)
    with open(d / "gap_vs_bound.dat", "w") as fh:
        fh.write("# k min_gap bound\n")
        for row in zip(k, min_gap, bound):
            fh.write("%d %.17g %.17g\n" % row)
    lines = [
        f"# Run summary: {meta.get('instance', '?')} / {meta.get('algorithm', '?')}",
        "",
        f"- iterations: {len(k)}",
        f"- final objective: {cols['objective'][-1]:.17g}",
        f"- best gap: {gaps[tau - 1]:.6e} at iteration {tau}",
    ]
    if F_star is not None:
        margins = bound - min_gap
        worst = int(np.nanargmin(margins))
        lines += [
            f"- reference optimum: {F_star:.17g}",
            f"- bound (phi_1 - phi*)/k: {int(np.sum(margins < 0))} violations,"
            f" worst margin {margins[worst]:.6e} at k={worst + 1}",
        ]
    else:
        lines.append("- reference optimum unknown: no bound column")
    (d / "summary.md").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _suite_equivalence(rows: list):
    cfg = SolveConfig()
    names = ["quartic1d", "fequalg"] + [f"quadratic_dc:{s}" for s in range(10)]
    for name in names:
        c = analysis.certify_equivalence(get_instance(name).problem, cfg, 50, tol=1e-8)
        rows.append((name, "prop1 equivalence", c.passed, c.worst_margin))
    for name in ["ring2d:v1", "ring2d:v2"] + [f"dcc:{s}" for s in range(5)]:
        p = get_instance(name).problem
        c = analysis.certify_equivalence(p, cfg, 30, tol=1e-6)
        rows.append((name, "prop5 equivalence", c.passed, c.worst_margin))
        tr = cccp_plus_solve(p, cfg.with_(max_outer_iters=30))
        worst = max(float(np.max(p.constraint_values(x))) for x in tr.iterates)
        rows.append((name, "prop5 feasibility", worst <= 1e-6, -worst))


def _suite_rates(rows: list):
    cfg = SolveConfig(max_outer_iters=1000)
    for name in ["quartic1d"] + [f"quadratic_dc:{s}" for s in range(10)]:
        inst = get_instance(name)
        tr = cccp_solve(inst.problem, cfg)
        c = analysis.certify_rates(tr, inst.F_star, "corollary2_rate")
        rows.append((name, "dc-gap rate", c.passed, c.worst_margin))
    for s in range(3):
        name = f"fwplus_concave:{s}"
        inst = get_instance(name)
        form = inst.fw_form
        tr = fw_plus_solve(form.phi, form.domain, form.psis, cfg.with_(max_outer_iters=500), form.omega1)
        c = analysis.certify_rates(tr, reference_optimum(name)[1], "theorem3_rate")
        rows.append((name, "fw-gap rate", c.passed, c.worst_margin))
        worst = max(float(form.psis[0](w)) for w in tr.iterates[1:])
        rows.append((name, "psi feasibility", worst <= 1e-6, -worst))
    inst = get_instance("fwplus_convex_box")
    form = inst.fw_form
    tr = fw_plus_solve(form.phi, form.domain, form.psis, cfg, form.omega1)
    for kind, fns in (("appendix_convex_phi", (form.phi,)), ("appendix_convex_psi", form.psis)):
        C = max(analysis.curvature_upper_bound(f, form.domain) for f in fns)
        c = analysis.certify_rates(tr, form.phi_star, kind, curvature=C, psis=form.psis)
        rows.append((inst.name, kind, c.passed, c.worst_margin))


def _suite_connections(rows: list):
    for name in DEMOS:
        for r in run_demo(name):
            rows.append((f"demo {name}", r.name, r.passed, 0.0 - r.max_deviation + 0.0))


SUITES = {"equivalence": _suite_equivalence, "rates": _suite_rates, "connections": _suite_connections}


def verify(suite: str) -> int:
    names = list(SUITES) if suite == "all" else [suite]
    rows: list = []
    for n in names:
        try:
            SUITES[n](rows)
        except DCForgeError as exc:
            rows.append((n, f"{type(exc).__name__}: {exc}", False, float("-inf")))
    width = max(len(r[0]) for r in rows)
    cwidth = max(len(r[1]) for r in rows)
    for name, check, ok, margin in rows:
        print(f"{name:<{width}}  {check:<{cwidth}}  {'PASS' if ok else 'FAIL'}  {margin: .3e}")
    failed = sum(not r[2] for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_CERT


def demo(name: str) -> int:
    names = list(DEMOS) if name == "all" else [name]
    ok = True
    for n in names:
        for r in run_demo(n):
            print(r.summary())
            ok &= r.passed
    return EXIT_OK if ok else EXIT_CERT


# ---------------------------------------------------------------------------
# entry point


def _setup_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("DCFORGE_LOG", "quiet").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("dcforge").setLevel(level)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dcforge", description="CCCP / Frank-Wolfe equivalence toolkit")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="solve one configured instance")
    r.add_argument("config")
    r.add_argument("--max-iters", type=int)
    r.add_argument("--gap-tol", type=float)
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    v = sub.add_parser("verify", help="run a certificate battery over the zoo")
    v.add_argument("suite", choices=[*SUITES, "all"])
    rep = sub.add_parser("report", help="summarize a run directory")
    rep.add_argument("trace_dir")
    d = sub.add_parser("demo", help="paired-trace demos of classical methods")
    d.add_argument("name", choices=[*DEMOS, "all"])
    return ap


def main(argv=None) -> int:
    _setup_logging()
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "run":
        return run(args.config, max_iters=args.max_iters, gap_tol=args.gap_tol, seed=args.seed, out=args.out)
    if args.command == "verify":
        return verify(args.suite)
    if args.command == "report":
        return report(args.trace_dir)
    return demo(args.name)


if __name__ == "__main__":
    sys.exit(main())
