"""Function oracles, convex domains, DC problems and the benchmark zoo."""

from .dc import (
    BenchmarkInstance,
    DCProblem,
    FWForm,
    dc_constrained,
    fequalg_instance,
    make_quadratic_dc,
    make_quartic_dc_1d,
    make_ring_constrained_dc_2d,
    quadratic_dc_instance,
)
from .domains import Domain, project_simplex
from .functions import (
    Quadratic,
    SmoothFn,
    affine,
    combine,
    constant,
    fd_gradient,
    negate,
    power_1d,
    quadratic,
    squared_distance,
    tilt,
)
from .oracle import grid_minimum, grid_stationary_oracle
from .zoo import get_instance, reference_optimum

__all__ = [
    "BenchmarkInstance",
    "DCProblem",
    "Domain",
    "FWForm",
    "Quadratic",
    "SmoothFn",
    "affine",
    "combine",
    "constant",
    "dc_constrained",
    "fd_gradient",
    "fequalg_instance",
    "get_instance",
    "grid_minimum",
    "grid_stationary_oracle",
    "make_quadratic_dc",
    "make_quartic_dc_1d",
    "make_ring_constrained_dc_2d",
    "negate",
    "power_1d",
    "project_simplex",
    "quadratic",
    "quadratic_dc_instance",
    "reference_optimum",
    "squared_distance",
    "tilt",
]
