"""Subject language: IR, parser, concrete interpreter."""

from .errors import (ConfigurationError, DuplicateNameError, Fault, ParseError,
                     ProgramError, ResolutionError, StepBudgetExceeded, TypeCheckError)
from .interp import DEFAULT_STEP_BUDGET, GroundTruthTrace, Interpreter, interpret, tdiv
from .ir import MethodRef, SubjectProgram, event_label
from .parser import parse_program, parse_state_expr
from .state import UNKNOWN, ConcreteState, Ref, eval_state_path, path_type

__all__ = [
    "ConfigurationError", "DuplicateNameError", "Fault", "ParseError", "ProgramError",
    "ResolutionError", "StepBudgetExceeded", "TypeCheckError", "DEFAULT_STEP_BUDGET",
    "GroundTruthTrace", "Interpreter", "interpret", "tdiv", "MethodRef", "SubjectProgram",
    "event_label", "parse_program", "parse_state_expr", "UNKNOWN", "ConcreteState", "Ref",
    "eval_state_path", "path_type",
]
