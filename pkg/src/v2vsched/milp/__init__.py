"""Mixed-boolean linear programming: model container, simplex, branch and bound."""

from .branch_bound import MilpLimits, solve_lp, solve_milp
from .model import (
    BOOLEAN,
    CONTINUOUS,
    EQ,
    GAP_LIMIT,
    GE,
    INFEASIBLE,
    ITERATION_LIMIT,
    LE,
    MilpModel,
    MilpSolution,
    OPTIMAL,
    UNBOUNDED,
    check_point,
    row_violation,
)
from .mps import dump_mps, load_mps
from .simplex import SimplexOptions

__all__ = [
    "BOOLEAN",
    "CONTINUOUS",
    "EQ",
    "GAP_LIMIT",
    "GE",
    "INFEASIBLE",
    "ITERATION_LIMIT",
    "LE",
    "MilpLimits",
    "MilpModel",
    "MilpSolution",
    "OPTIMAL",
    "SimplexOptions",
    "UNBOUNDED",
    "check_point",
    "dump_mps",
    "load_mps",
    "row_violation",
    "solve_lp",
    "solve_milp",
]
