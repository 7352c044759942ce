"""A small answer set programming system: parser, grounder, solver, oracle."""

from .syntax import (
    ArityError,
    ASPSyntaxError,
    Program,
    format_program,
    format_statement,
    merge_programs,
    parse_program,
    parse_term,
)
from .ground import (
    GroundingError,
    GroundProgram,
    GroundRule,
    UnboundConstantError,
    UnsafeRuleError,
    UnsupportedProgramError,
    ground,
)
from .solve import OPTIMUM, SAT, TIMEOUT, UNSAT, AnswerSet, SolveOptions, SolveResult, solve
from .check import TooManyAtomsError, brute_force_models, check_stable

__all__ = [
    "ArityError",
    "ASPSyntaxError",
    "Program",
    "format_program",
    "format_statement",
    "merge_programs",
    "parse_program",
    "parse_term",
    "GroundingError",
    "GroundProgram",
    "GroundRule",
    "UnboundConstantError",
    "UnsafeRuleError",
    "UnsupportedProgramError",
    "ground",
    "OPTIMUM",
    "SAT",
    "TIMEOUT",
    "UNSAT",
    "AnswerSet",
    "SolveOptions",
    "SolveResult",
    "solve",
    "TooManyAtomsError",
    "brute_force_models",
    "check_stable",
]
