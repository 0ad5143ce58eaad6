import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from dcforge import cli
from dcforge.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_config_text():
    kv = cli.parse_config_text("# comment\ninstance = quartic1d  # trailing\n\nalgorithm=cccp\n")
    assert kv == {"instance": "quartic1d", "algorithm": "cccp"}
    with pytest.raises(ConfigError):
        cli.parse_config_text("no equals sign here\n")


def test_build_run_config():
    rc = cli.build_run_config({"instance": "quadratic_dc", "seed": "3", "algorithm": "cccp", "max_iters": "7"})
    assert rc.instance_name == "quadratic_dc:3"
    assert rc.solve.max_outer_iters == 7
    with pytest.raises(ConfigError):
        cli.build_run_config({"instance": "quartic1d", "algorithm": "cccp", "bogus": "1"})
    with pytest.raises(ConfigError):
        cli.build_run_config({"instance": "quartic1d", "algorithm": "newton"})


def test_run_quartic(tmp_path, capsys):
    out = tmp_path / "q"
    assert cli.main(["run", str(CONFIGS / "quartic1d_cccp.cfg"), "--out", str(out)]) == 0
    cols = cli.read_trace_csv(out / "trace.csv")
    assert len(cols["k"]) == 100
    np.testing.assert_array_equal(cols["k"], np.arange(1, 101))
    assert np.all(np.isnan(cols["wall_ms"]))
    assert "corollary2_rate PASS" in (out / "certificates.txt").read_text()
    meta = cli._read_meta(out / "run_meta.txt")
    assert meta["instance"] == "quartic1d" and meta["n_iters"] == "100"
    assert float(meta["final"]) == pytest.approx(1 / np.sqrt(2), abs=1e-9)


def test_run_f_equals_g(tmp_path):
    out = tmp_path / "fe"
    assert cli.main(["run", str(CONFIGS / "fequalg_cccp.cfg"), "--out", str(out)]) == 0
    cols = cli.read_trace_csv(out / "trace.csv")
    assert np.max(np.abs(cols["dc_gap"])) <= 1e-10


def test_flag_overrides(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", str(CONFIGS / "quartic1d_cccp.cfg"), "--out", str(out), "--max-iters", "12"]) == 0
    assert len(cli.read_trace_csv(out / "trace.csv")["k"]) == 12
    cfg = _cfg(tmp_path, "instance = quadratic_dc\nalgorithm = cccp\nmax_outer_iters = 5\nseed = 1\n")
    assert cli.main(["run", str(cfg), "--out", str(out), "--seed", "6"]) == 0
    assert cli._read_meta(out / "run_meta.txt")["instance"] == "quadratic_dc:6"


def test_gap_tol_stops_run(tmp_path):
    out = tmp_path / "g"
    assert cli.main(["run", str(CONFIGS / "quartic1d_cccp.cfg"), "--out", str(out), "--gap-tol", "1e-6"]) == 0
    assert cli._read_meta(out / "run_meta.txt")["stopped"] == "gap_tol"


def test_cccp_plus_without_constraints_is_config_error(tmp_path):
    assert cli.main(["run", str(CONFIGS / "invalid_cccp_plus.cfg"), "--out", str(tmp_path / "x")]) == 2
    assert not (tmp_path / "x").exists()


def test_bad_key_and_missing_file(tmp_path):
    cfg = _cfg(tmp_path, "instance = quartic1d\nalgorithm = cccp\nbogus = 1\n")
    assert cli.main(["run", str(cfg)]) == 2
    assert cli.main(["run", str(tmp_path / "missing.cfg")]) == 2
    assert cli.main(["frobnicate"]) == 2


def test_solver_error_exit_code(tmp_path):
    cfg = _cfg(tmp_path, "instance = boxdc:0\nalgorithm = cccp\ninner_max_iters = 1\ninner_method = pgd\n")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "s")]) == 3


def test_failing_certificate_exit_code(tmp_path):
    # three steps leave the final iterate far from stationary
    cfg = _cfg(tmp_path, "instance = quartic1d\nalgorithm = cccp\nmax_outer_iters = 3\ncertificates = stationarity\n")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "c")]) == 1


def test_report(tmp_path, capsys):
    out = tmp_path / "q"
    cli.main(["run", str(CONFIGS / "quartic1d_cccp.cfg"), "--out", str(out)])
    assert cli.main(["report", str(out)]) == 0
    dat = np.loadtxt(out / "gap_vs_bound.dat")
    assert dat.shape == (100, 3)
    assert np.all(np.diff(dat[:, 1]) <= 0)
    np.testing.assert_allclose(dat[:, 2], 0.25 / dat[:, 0], rtol=1e-12)
    assert np.all(dat[:, 1] <= dat[:, 2])
    summary = (out / "summary.md").read_text()
    assert "0 violations" in summary


def test_report_bad_inputs(tmp_path):
    (tmp_path / "trace.csv").write_text(",".join(cli.COLUMNS) + "\n")
    assert cli.main(["report", str(tmp_path)]) == 2
    (tmp_path / "trace.csv").write_text("garbage\n1,2\n")
    assert cli.main(["report", str(tmp_path)]) == 2
    assert cli.main(["report", str(tmp_path / "nowhere")]) == 2


def test_verify_connections(capsys):
    assert cli.main(["verify", "connections"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_demo(capsys):
    assert cli.main(["demo", "dualprox"]) == 0
    assert "dualprox" in capsys.readouterr().out


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.cfg")), ids=lambda p: p.stem)
def test_shipped_configs(path, tmp_path):
    expected = 2 if path.stem.startswith("invalid") else 0
    assert cli.main(["run", str(path), "--out", str(tmp_path / path.stem)]) == expected


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "dcforge", "run", str(CONFIGS / "quartic1d_fw.cfg"), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        env={"DCFORGE_LOG": "quiet", "PATH": ""},
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "trace.csv").exists()
