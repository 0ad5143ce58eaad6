"""Per-iteration logs shared by every outer driver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COLUMNS = ("k", "objective", "fw_gap", "dc_gap", "step_size", "inner_iters", "kkt_residual", "feas_max", "wall_ms")


@dataclass
class IterateTrace:
    """Row ``k`` (1-based) describes the iterate ``w_k`` and the step taken from it.

    ``iterates`` holds ``w_1 .. w_{K+1}``: the step is always taken before the
    stopping test, so there is one more iterate than rows.  ``extra`` carries
    driver-specific per-row series (complementary slackness, inner residuals,
    subproblem solutions).
    """

    algorithm: str
    iterates: list[np.ndarray] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    fw_gap: list[float | None] = field(default_factory=list)
    dc_gap: list[float | None] = field(default_factory=list)
    step: list[float] = field(default_factory=list)
    inner_iters: list[int] = field(default_factory=list)
    kkt_residual: list[float | None] = field(default_factory=list)
    feas_max: list[float | None] = field(default_factory=list)
    wall_ms: list[float] = field(default_factory=list)
    extra: dict[str, list] = field(default_factory=dict)
    stopped: str = ""
    meta: dict = field(default_factory=dict)

    def add_row(self, *, objective, fw_gap=None, dc_gap=None, step, inner_iters, kkt=None, feas=None, wall_ms=0.0, **extra):
        self.objective.append(float(objective))
        self.fw_gap.append(None if fw_gap is None else float(fw_gap))
        self.dc_gap.append(None if dc_gap is None else float(dc_gap))
        self.step.append(float(step))
        self.inner_iters.append(int(inner_iters))
        self.kkt_residual.append(None if kkt is None else float(kkt))
        self.feas_max.append(None if feas is None else float(feas))
        self.wall_ms.append(float(wall_ms))
        for key, v in extra.items():
            self.extra.setdefault(key, []).append(v)

    @property
    def n_iters(self) -> int:
        return len(self.objective)

    @property
    def gaps(self) -> np.ndarray:
        """The FW gap when recorded, else the DC surrogate gap."""
        src = self.fw_gap if any(v is not None for v in self.fw_gap) else self.dc_gap
        return np.array([np.nan if v is None else v for v in src], dtype=float)

    def running_min_gap(self) -> np.ndarray:
        return np.minimum.accumulate(self.gaps)

    @property
    def best_index(self) -> int:
        """1-based index of the smallest gap (first one on ties)."""
        return int(np.nanargmin(self.gaps)) + 1

    @property
    def best_gap(self) -> float:
        return float(self.gaps[self.best_index - 1])

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def x_iterates(self, dim: int | None = None) -> np.ndarray:
        """Iterates as an array, truncated to the first ``dim`` coordinates if given."""
        X = np.array(self.iterates)
        return X if dim is None else X[:, :dim]

    def rows(self):
        for i in range(self.n_iters):
            yield {
                "k": i + 1,
                "objective": self.objective[i],
                "fw_gap": self.fw_gap[i],
                "dc_gap": self.dc_gap[i],
                "step_size": self.step[i],
                "inner_iters": self.inner_iters[i],
                "kkt_residual": self.kkt_residual[i],
                "feas_max": self.feas_max[i],
                "wall_ms": self.wall_ms[i],
            }
