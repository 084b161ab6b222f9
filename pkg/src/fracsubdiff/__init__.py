"""Compact finite-difference solvers for two-term time-fractional subdiffusion."""

from .fracweights import combined_weights, gl_weights, shifted_weights, weight_table
from .problem import ProblemSpec, load_problem, paper_example, validate
from .solver import CompactSolver, GhostPolicy, SchemeKind, SolutionHistory, solve

__version__ = "0.1.0"

__all__ = [
    "CompactSolver",
    "GhostPolicy",
    "ProblemSpec",
    "SchemeKind",
    "SolutionHistory",
    "combined_weights",
    "gl_weights",
    "load_problem",
    "paper_example",
    "shifted_weights",
    "solve",
    "validate",
    "weight_table",
]
