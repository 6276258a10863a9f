"""Greedy maximization of monotone, possibly non-submodular functions on the integer lattice."""
from .lattice import BoxConstraint, budget_points, check_lattice_vector, unit, zeros
from .maximizers import (ALGORITHMS, FastGreedy, GreedyResult, GreedyTrace, ParallelThresholdGreedy,
                         StandardGreedy, ThresholdGreedy, binary_search_pivot, fast_greedy,
                         standard_greedy, threshold_greedy, threshold_greedy_parallel)
from .metrics import (NonSubmodularityProfile, exact_curvature, exact_dr_ratio,
                      exact_submodularity_ratio, greedy_submodularity_ratio, nonsubmodularity_report,
                      parallel_bound, performance_bound, standard_greedy_bound,
                      threshold_greedy_dr_ratio)
from .objectives import (BoxViolation, BudgetSaturatedObjective, ContractViolation, ModularObjective,
                         Objective, PerturbedCoverageObjective, TabulatedObjective,
                         make_synthetic_objective, random_monotone_table)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "BoxConstraint", "BoxViolation", "BudgetSaturatedObjective", "ContractViolation",
    "FastGreedy", "GreedyResult", "GreedyTrace", "ModularObjective", "NonSubmodularityProfile",
    "Objective", "ParallelThresholdGreedy", "PerturbedCoverageObjective", "StandardGreedy",
    "TabulatedObjective", "ThresholdGreedy", "binary_search_pivot", "budget_points",
    "check_lattice_vector", "exact_curvature", "exact_dr_ratio", "exact_submodularity_ratio",
    "fast_greedy", "greedy_submodularity_ratio", "make_synthetic_objective",
    "nonsubmodularity_report", "parallel_bound", "performance_bound", "random_monotone_table",
    "standard_greedy", "standard_greedy_bound", "threshold_greedy", "threshold_greedy_dr_ratio",
    "threshold_greedy_parallel", "unit", "zeros",
]
