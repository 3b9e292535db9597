"""Best-subset selection for linear regression.

Exact branch-and-bound over big-M mixed-integer models (absolute and
squared error criteria), size-penalized criteria for data with more
columns than observations, and stepwise/core-set heuristics.
"""

from .bigm import BigMResult, Method, Validity, estimate_m, m_for_v, m_for_x_heuristic, m_for_x_lp, m_for_x_size
from .bnb import SolveReport, exhaustive, lad_node_bound, mse_node_bound, solve_mip
from .dataset import Instance, InstanceStats, compute_stats, generate, generate_prefix, load_csv, save_csv
from .heuristics import (CoreState, SelectionDistribution, build_distribution, core_heuristic,
                         core_random, stepwise, theta_auto)
from .lp import LpProblem, LpSolution, LpStatus, solve_lp, solve_lp_fixed
from .models import CutSet, MipModel, build, generate_cuts
from .objectives import EvalCache, Kind, ObjectiveSpec, SubsetSolution, evaluate, fit, lad_fit, ols_fit
from .solver import gap_sol, solve

__version__ = "0.1.0"

__all__ = [
    "BigMResult", "Method", "Validity", "estimate_m", "m_for_v", "m_for_x_heuristic", "m_for_x_lp",
    "m_for_x_size", "SolveReport", "exhaustive", "lad_node_bound", "mse_node_bound", "solve_mip",
    "Instance", "InstanceStats", "compute_stats", "generate", "generate_prefix", "load_csv",
    "save_csv", "CoreState", "SelectionDistribution", "build_distribution", "core_heuristic",
    "core_random", "stepwise", "theta_auto", "LpProblem", "LpSolution", "LpStatus", "solve_lp",
    "solve_lp_fixed", "CutSet", "MipModel", "build", "generate_cuts", "EvalCache", "Kind",
    "ObjectiveSpec", "SubsetSolution", "evaluate", "fit", "lad_fit", "ols_fit", "gap_sol", "solve",
]
