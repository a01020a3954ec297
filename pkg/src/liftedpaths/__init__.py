"""Approximate solver for lifted disjoint paths with a certified dual lower bound."""

from .instance import Instance, InstanceError, S, T, generate_instance, load_instance, random_instance, read_instance
from .intervals import IntervalPlan, solve_intervals
from .message_passing import SolverConfig, SolverReport, run
from .solution import Solution, adjust_lifted, check_solution

__all__ = [
    "Instance", "InstanceError", "S", "T", "generate_instance", "load_instance", "random_instance",
    "read_instance", "IntervalPlan", "solve_intervals", "SolverConfig", "SolverReport", "run",
    "Solution", "adjust_lifted", "check_solution",
]
