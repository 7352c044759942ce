"""Few-shot prompts: rule translation (examples, background, rule) and state translation (examples, question)."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib.resources import files
from string import Template

from .bank import ExampleBank, PuzzleInstance, check_question

__all__ = ["TEMPLATE_VERSION", "PromptError", "build_rule_prompt", "build_state_prompt", "cot_prompt", "load_template"]

TEMPLATE_VERSION = "v1"

_HEADER = re.compile(r"^=== (\w+) ===$", re.M)


class PromptError(ValueError):
    pass


@lru_cache(maxsize=None)
def load_template(name: str, version: str = TEMPLATE_VERSION) -> dict:
    """Sections of a template asset, split at ``=== name ===`` headers."""
    text = (files(__package__) / "assets" / "templates" / f"{name}.{version}.txt").read_text()
    marks = list(_HEADER.finditer(text))
    out = {}
    for m, nxt in zip(marks, marks[1:] + [None]):
        body = text[m.end() + 1:nxt.start() if nxt else len(text)]
        out[m.group(1)] = body.rstrip("\n") + "\n"
    return out


def _examples(section: str, examples) -> str:
    t = Template(section)
    return "".join(t.substitute(text=ex.text.strip(), asp=ex.asp.strip()) + "\n" for ex in examples)


def build_rule_prompt(bank: ExampleBank, p: PuzzleInstance, i: int) -> str:
    """All rule example pairs in bank order, then the background, then rule ``i`` (1-based)."""
    if not 1 <= i <= len(p.rules):
        raise PromptError(f"rule index {i} outside 1..{len(p.rules)}")
    if not bank.rule_examples:
        raise PromptError("example bank has no rule examples")
    tpl = load_template("rule_prompt")
    return Template(tpl["prompt"]).substitute(
        examples=_examples(tpl["example"], bank.rule_examples),
        background=p.background.strip(),
        rule=p.rules[i - 1].strip(),
    )


def build_state_prompt(bank: ExampleBank, p: PuzzleInstance) -> str:
    """All state example pairs in bank order, then the question; no background."""
    if not bank.state_examples:
        raise PromptError("example bank has no state examples")
    check_question(p.kind, p.question)
    tpl = load_template("state_prompt")
    return Template(tpl["prompt"]).substitute(
        examples=_examples(tpl["example"], bank.state_examples),
        question=p.question.strip(),
    )


def cot_prompt(state: str, query: str) -> str:
    """The chain-of-thought legality prompt (kept as an asset; not used by the pipeline)."""
    text = (files(__package__) / "assets" / "templates" / f"cot_bw_legality.{TEMPLATE_VERSION}.txt").read_text()
    return Template(text).substitute(state=state.strip(), query=query.strip())
