import numpy as np
import pytest

from dcforge.solvers import SolveConfig

CRITERIA = {
    1: "CCCP = FW on the basic lift (10 quadratic DC + quartic1d)",
    2: "CCCP+ = FW+ on the DC-constrained lift (ring2d v1/v2 + 5 dcc)",
    3: "CCCP min dc_gap <= (F1 - F*)/k for k <= 1000",
    4: "concave FW+ min gap <= (phi1 - phi*)/k, psi <= 1e-6",
    5: "convex FW+ phi and psi within 2 L D^2/(k+1)",
    6: "KKT identity and complementary slackness",
    7: "classical methods reproduced by FW",
    8: "curvature estimates vs concavity and L D^2",
    9: "stationarity check at grid-oracle points and perturbations",
    10: "byte-identical trace.csv across runs",
}
_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record one criterion's outcome for the end-of-run summary."""

    def record(num: int, passed: bool, detail: str = "") -> None:
        _RESULTS[num] = (bool(passed), detail)
        print(f"[criterion {num}] {'PASS' if passed else 'FAIL'}: {CRITERIA[num]} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title in CRITERIA.items():
        if num in _RESULTS:
            ok, detail = _RESULTS[num]
            status = "PASS" if ok else "FAIL"
        else:
            status, detail = "NOT RUN", ""
        terminalreporter.write_line(f"{num:>2}. {status:<7} {title}  {detail}")


@pytest.fixture
def cfg():
    return SolveConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)
