"""DC programming through Frank-Wolfe: CCCP, FW, their constrained variants and certificates."""

from .errors import *  # noqa: F401,F403
from .problems import DCProblem, Domain, SmoothFn, get_instance
from .solvers import SolveConfig, StepRule, cccp_plus_solve, cccp_solve, fw_plus_solve, fw_solve
from .transforms import EpigraphLift, lift

__version__ = "0.1.0"

__all__ = [
    "DCProblem",
    "Domain",
    "EpigraphLift",
    "SmoothFn",
    "SolveConfig",
    "StepRule",
    "cccp_plus_solve",
    "cccp_solve",
    "fw_plus_solve",
    "fw_solve",
    "get_instance",
    "lift",
]
