"""Puzzle domains: grid puzzles, Blocks World, generators and verifiers."""

from .grids import (
    GRID_KINDS,
    BlackMask,
    Grid,
    GridFormatError,
    VerifyReport,
    Violation,
    parse_grid,
    verify_fillomino,
    verify_grid_answer,
    verify_hitori,
    verify_sudoku,
)
from .blocks import (
    TABLE,
    TASK_KINDS,
    BWAction,
    BWParseError,
    BWState,
    BWStateError,
    GoalFormula,
    GoalLiteral,
    IllegalMove,
    Prop,
    TaskInstance,
    bw_apply,
    bw_optimal_plan_length,
    bw_oracle_label,
    bw_run,
    format_task,
    parse_bw_actions,
    parse_bw_goal,
    parse_bw_state,
    parse_task,
)
from .generate import GenerationError, Generated, bw_optimal_plan, count_sudoku_solutions, generate_instance

PUZZLE_KINDS = GRID_KINDS + TASK_KINDS
