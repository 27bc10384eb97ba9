"""Power allocation solvers: minimum-power LP, global SCA/Dinkelbach, and ILO."""

from .ilo import solve_ilo
from .lp import LpError, min_power
from .sca import SolveOutcome, SolverFailure, solve_global, solve_model

__all__ = ["LpError", "SolveOutcome", "SolverFailure", "min_power", "solve_global", "solve_ilo", "solve_model"]
