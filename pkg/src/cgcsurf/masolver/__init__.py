"""Discrete Monge-Ampere machinery."""

from .exhaustion import barrier_data, exhaustion_solve, level_region, require_regular
from .checks import comparison_check, entireness_check, ma_ordering
from .pipeline import curvature_report, minkowski_solve
from .problem import MAProblem, SupportSolution, density, dirichlet_solve, discrete_convexity

__all__ = [
    "MAProblem", "SupportSolution", "density", "dirichlet_solve", "discrete_convexity",
    "exhaustion_solve", "minkowski_solve", "curvature_report",
    "comparison_check", "entireness_check", "ma_ordering", "barrier_data", "level_region", "require_regular",
]
