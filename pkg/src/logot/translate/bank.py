"""Puzzle instances ⟨background, rules, question⟩ and few-shot example banks."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib.resources import files
from typing import Optional

from ..asp import parse_program
from ..puzzles import GRID_KINDS, PUZZLE_KINDS, TASK_KINDS, Grid, TaskInstance, format_task, generate_instance, parse_grid, parse_task

__all__ = [
    "PuzzleInstance",
    "Example",
    "ExampleBank",
    "puzzle_description",
    "puzzle_instance",
    "load_bank",
    "build_default_bank",
    "question_text",
    "check_question",
]

# generator settings for the state example of each shipped bank
_BANK_EXAMPLE_SEED = 1000
_BANK_EXAMPLE_PARAMS = {"hitori": {"size": 5}, "fillomino": {"size": 5}}


def check_question(kind: str, question: str):
    """Parse ``question`` with the kind's instance parser (raises on bad input)."""
    if not question.strip():
        raise ValueError("empty puzzle question")
    if kind in GRID_KINDS:
        return parse_grid(question, kind)
    if kind in TASK_KINDS:
        return parse_task(question, kind)
    raise ValueError(f"unknown puzzle kind {kind!r}")


def question_text(instance) -> str:
    """The I_q text for a parsed instance (task labels are never included)."""
    if isinstance(instance, Grid):
        return instance.to_text() + "\n"
    if isinstance(instance, TaskInstance):
        return format_task(replace(instance, label=None))
    raise TypeError(f"not a puzzle instance: {instance!r}")


@dataclass(frozen=True)
class PuzzleInstance:
    kind: str
    background: str
    rules: tuple  # R_1..R_K
    question: str  # I_q

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.kind not in PUZZLE_KINDS:
            raise ValueError(f"unknown puzzle kind {self.kind!r}")
        if not self.rules:
            raise ValueError("a puzzle needs at least one rule")
        check_question(self.kind, self.question)

    def parsed(self):
        return check_question(self.kind, self.question)


@lru_cache(maxsize=None)
def _descriptions() -> dict:
    return json.loads((files(__package__) / "assets" / "puzzles.json").read_text())


def puzzle_description(kind: str) -> tuple:
    """(background, rules) shipped for a puzzle kind."""
    d = _descriptions()
    if kind not in d:
        raise ValueError(f"unknown puzzle kind {kind!r}")
    return d[kind]["background"], tuple(d[kind]["rules"])


def puzzle_instance(kind: str, question: str) -> PuzzleInstance:
    background, rules = puzzle_description(kind)
    return PuzzleInstance(kind, background, rules, question)


@dataclass(frozen=True)
class Example:
    text: str  # natural-language side (R_i' or Q_i')
    asp: str  # logic side
    source: str  # puzzle kind the example comes from


@dataclass(frozen=True)
class ExampleBank:
    kind: str  # the target kind this bank is meant for
    rule_examples: tuple = ()  # D_r
    state_examples: tuple = ()  # D_q

    def __post_init__(self):
        object.__setattr__(self, "rule_examples", tuple(self.rule_examples))
        object.__setattr__(self, "state_examples", tuple(self.state_examples))
        for ex in self.rule_examples + self.state_examples:
            parse_program(ex.asp)

    @property
    def sources(self) -> tuple:
        return tuple(dict.fromkeys(ex.source for ex in self.rule_examples + self.state_examples))

    def to_dict(self) -> dict:
        def rows(xs):
            return [{"text": x.text, "asp": x.asp, "source": x.source} for x in xs]

        return {"kind": self.kind, "rule_examples": rows(self.rule_examples), "state_examples": rows(self.state_examples)}

    @classmethod
    def from_dict(cls, d: dict) -> "ExampleBank":
        def rows(xs):
            return tuple(Example(x["text"], x["asp"], x["source"]) for x in xs)

        return cls(d["kind"], rows(d.get("rule_examples", ())), rows(d.get("state_examples", ())))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode()).hexdigest()


def load_bank(kind: str, path: Optional[str] = None) -> ExampleBank:
    """The shipped bank for ``kind``, or one read from a JSON file."""
    if path is not None:
        with open(path, encoding="utf-8") as f:
            return ExampleBank.from_dict(json.load(f))
    if kind not in PUZZLE_KINDS:
        raise ValueError(f"unknown puzzle kind {kind!r}")
    return ExampleBank.from_dict(json.loads((files(__package__) / "assets" / "banks" / f"{kind}.json").read_text()))


def build_default_bank(kind: str) -> ExampleBank:
    """Rebuild the shipped bank for ``kind`` from the encodings and a fixed generated example.

    Grid puzzles take their rule examples from the other grid puzzles; the
    Blocks World tasks share one action theory and take it from a sibling
    task.  The state example is always of the target kind.
    """
    from .reference import encoding_sections, reference_state_text

    if kind in GRID_KINDS:
        sources = [k for k in GRID_KINDS if k != kind]
    elif kind in TASK_KINDS:
        sources = ["projection" if kind == "legality" else "legality"]
    else:
        raise ValueError(f"unknown puzzle kind {kind!r}")
    rule_examples = []
    for src in sources:
        _, rules = puzzle_description(src)
        for text, asp in zip(rules, encoding_sections(src)):
            rule_examples.append(Example(text, asp, src))
    params = _BANK_EXAMPLE_PARAMS.get(kind, {"blocks": 4} if kind in TASK_KINDS else None)
    question = question_text(generate_instance(kind, params, seed=_BANK_EXAMPLE_SEED).instance)
    state_examples = [Example(question, reference_state_text(kind, question), kind)]
    return ExampleBank(kind, tuple(rule_examples), tuple(state_examples))
