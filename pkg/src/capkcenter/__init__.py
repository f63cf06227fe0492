"""Approximation for capacitated k-supplier and k-center with outliers.

The main entry point is :func:`solve_metric`; :func:`exact_opt` gives the
exact optimum of small instances for comparison.
"""
from .model import GraphInstance, MetricInstance, Solution, validate_metric, verify_solution
from .oracle import OracleResult, exact_opt
from .pipeline import solve_graphic
from .thresholding import FACTORS, SolveResult, solve_metric

__all__ = [
    "FACTORS",
    "GraphInstance",
    "MetricInstance",
    "OracleResult",
    "Solution",
    "SolveResult",
    "exact_opt",
    "solve_graphic",
    "solve_metric",
    "validate_metric",
    "verify_solution",
]
