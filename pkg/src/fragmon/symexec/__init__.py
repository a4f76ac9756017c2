"""Bounded symbolic execution and condition synthesis."""

from .canon import Atom, normalize
from .conditions import (Condition, ConditionFileError, ConditionSet, extract_conditions,
                         format_conditions, parse_condition, parse_conditions, program_hash,
                         read_conditions, synthesize, write_conditions)
from .engine import (DEFAULT_INLINE_DEPTH, DEFAULT_LOOP_BOUND, PathCondition,
                     SymbolicExecutor, symbolic_execute)
from .solver import Solver

__all__ = [
    "Atom", "normalize", "Condition", "ConditionFileError", "ConditionSet",
    "extract_conditions", "format_conditions", "parse_condition", "parse_conditions",
    "program_hash", "read_conditions", "synthesize", "write_conditions",
    "DEFAULT_INLINE_DEPTH", "DEFAULT_LOOP_BOUND", "PathCondition", "SymbolicExecutor",
    "symbolic_execute", "Solver",
]
