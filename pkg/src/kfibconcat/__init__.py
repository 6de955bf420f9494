"""k-generalized Fibonacci numbers that are concatenations of two terms."""

from .kfib import ConcatSolution, KSequence, concat_value, digits10, index_of, sequence, term
from .pipeline import ProofReport, RunConfig, emit_report, run
from .search import SearchRange, brute_force, power_case_impossible, verify_solution

__all__ = [
    "ConcatSolution",
    "KSequence",
    "ProofReport",
    "RunConfig",
    "SearchRange",
    "brute_force",
    "concat_value",
    "digits10",
    "emit_report",
    "index_of",
    "power_case_impossible",
    "run",
    "sequence",
    "term",
    "verify_solution",
]
__version__ = "0.1.0"
