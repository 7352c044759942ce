"""Deterministic translators: the reference encodings and instance-to-facts conversion."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib.resources import files

from ..asp import Program, parse_program
from ..asp.syntax import Disjunction, Rule
from ..puzzles import GRID_KINDS, TABLE, TASK_KINDS, TaskInstance, parse_grid, parse_task
from ..puzzles.blocks import parse_bw_sentences

__all__ = [
    "ENCODING_FILES",
    "encoding_text",
    "encoding_sections",
    "reference_rules",
    "reference_state_text",
    "reference_translate_state",
    "bw_goal_rules",
    "strip_facts",
]

ENCODING_FILES = {"sudoku": "sudoku", "hitori": "hitori", "fillomino": "fillomino"}
ENCODING_FILES.update({k: "blocksworld" for k in TASK_KINDS})

_SECTION = re.compile(r"^% \[rule (\d+)\]\s*$", re.M)


@lru_cache(maxsize=None)
def encoding_text(kind: str) -> str:
    if kind not in ENCODING_FILES:
        raise ValueError(f"unknown puzzle kind {kind!r}")
    return (files(__package__) / "assets" / "encodings" / f"{ENCODING_FILES[kind]}.lp").read_text()


def encoding_sections(kind: str) -> list:
    """The encoding split at its ``% [rule i]`` markers: element i-1 translates rule i."""
    text = encoding_text(kind)
    marks = list(_SECTION.finditer(text))
    out = []
    for n, (m, nxt) in enumerate(zip(marks, marks[1:] + [None]), 1):
        if int(m.group(1)) != n:
            raise ValueError(f"{kind} encoding: rule sections out of order at rule {m.group(1)}")
        out.append(text[m.end():nxt.start() if nxt else len(text)].strip("\n") + "\n")
    return out


def reference_rules(kind: str) -> Program:
    return parse_program(encoding_text(kind))


def _atom(prop) -> str:
    if prop.kind == "on":
        return f"on({prop.block}, {prop.location})"
    return f"clear({prop.block})"


def _holds(lit, step: str) -> str:
    sign = "" if lit.positive else "-"
    return f"{sign}holds({_atom(lit.prop)}, {step})"


def bw_goal_rules(kind: str, goal) -> str:
    """Task-specific rules: when the goal counts as reached, and the query to check."""
    if kind == "goal_recognition":
        conj = ", ".join(_holds(l, "I") for l in goal.literals)
        return f"goal(I) :- step(I), {conj}.\n"
    out = "goal(I) :- step(I).\n"
    if kind in ("projection", "plan_verification"):
        conj = ", ".join(_holds(l, "num_step") for l in goal.literals)
        out += f"query :- {conj}.\n:- not query.\n"
    return out


def _bw_facts(t: TaskInstance) -> str:
    props = parse_bw_sentences(t.section("state"))
    lines = list(dict.fromkeys(f"holds({_atom(p)}, 0)." for p in props))
    # clear blocks are often left implicit in the text
    stated = {p.block for p in props if p.kind == "clear"}
    lines += [f"holds(clear({b}), 0)." for b in sorted(t.state.clear - stated)]
    mentioned = [p.block for p in props] + sorted(t.state.blocks)
    for a in t.actions:
        mentioned += [a.block, a.source, a.dest]
    if t.query is not None:
        mentioned += sorted(t.query.blocks())
    blocks = [b for b in dict.fromkeys(mentioned) if b != TABLE]
    lines.append(" ".join(f"block({b})." for b in blocks))
    for i, a in enumerate(t.actions):
        lines.append(f"occurs(move({a.block}, {a.source}, {a.dest}), {i}).")
    lines.append(f"#const num_step={len(t.actions)}.")
    return "\n".join(lines) + "\n" + bw_goal_rules(t.kind, t.query)


def reference_state_text(kind: str, question: str) -> str:
    if kind in GRID_KINDS:
        grid = parse_grid(question, kind)
        lines = [f"#const n={grid.size}."]
        for r in range(1, grid.size + 1):
            for c in range(1, grid.size + 1):
                if grid[r, c]:
                    lines.append(f"pos({r}, {c}, {grid[r, c]}).")
        return "\n".join(lines) + "\n"
    if kind in TASK_KINDS:
        return _bw_facts(parse_task(question, kind))
    raise ValueError(f"unknown puzzle kind {kind!r}")


def reference_translate_state(p) -> Program:
    """Facts (and, for Blocks World, task rules) for one puzzle instance."""
    return parse_program(reference_state_text(p.kind, p.question))


def strip_facts(program: Program, predicate: str) -> Program:
    """Drop the facts of one predicate (e.g. the observed actions)."""
    def is_fact(s):
        return (isinstance(s, Rule) and not s.body and isinstance(s.head, Disjunction)
                and len(s.head.atoms) == 1 and s.head.atoms[0].predicate == predicate)
    return Program(tuple(s for s in program.statements if not is_fact(s)))
