from .lp import (
    Constraint,
    LinearProgram,
    LpResult,
    lp_solve_exact,
    max_min_coordinate,
    max_min_coordinate_point,
)
from .linalg import LinearSolution, solve_linear_system_exact
from .special import beta_quantile, dirichlet_sample

__all__ = [
    "Constraint",
    "LinearProgram",
    "LpResult",
    "lp_solve_exact",
    "max_min_coordinate",
    "max_min_coordinate_point",
    "LinearSolution",
    "solve_linear_system_exact",
    "beta_quantile",
    "dirichlet_sample",
]
