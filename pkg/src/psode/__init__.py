"""Modular PSO, DE and PSODE hybrid algorithms with a small benchmarking harness."""

__version__ = "0.1.0"

from .core import Budget, BudgetExhausted, InvalidConfig, Problem, Swarm
from .engine import InstanceSpec, ParseError, enumerate_instances, parse_name, render, run
from .estimator import ModularOptimizer

__all__ = [
    "Budget",
    "BudgetExhausted",
    "InstanceSpec",
    "InvalidConfig",
    "ModularOptimizer",
    "ParseError",
    "Problem",
    "Swarm",
    "enumerate_instances",
    "parse_name",
    "render",
    "run",
]
