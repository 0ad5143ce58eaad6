"""Outer drivers (FW, FW+, CCCP, CCCP+) and the shared inner convex solver."""

from .cccp import cccp_plus_solve, cccp_solve, linearized_constraints
from .config import InnerSolveReport, SolveConfig, StepRule, greedy_step
from .fw import curvature_mode, fw_plus_solve, fw_solve
from .inner import inner_convex_solve
from .trace import COLUMNS, IterateTrace

__all__ = [
    "COLUMNS",
    "InnerSolveReport",
    "IterateTrace",
    "SolveConfig",
    "StepRule",
    "cccp_plus_solve",
    "cccp_solve",
    "curvature_mode",
    "fw_plus_solve",
    "fw_solve",
    "greedy_step",
    "inner_convex_solve",
    "linearized_constraints",
]
