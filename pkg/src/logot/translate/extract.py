"""Pull the ASP statements out of a raw LLM response."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..asp import ASPSyntaxError, Program, parse_program

__all__ = ["ExtractionError", "Extraction", "extract_asp", "extract_asp_report"]

_FENCE = re.compile(r"```[^\n]*\n(.*?)(?:```|\Z)", re.S)
_OUTPUT = re.compile(r"^\s*Output\s*:\s*$", re.M | re.I)


class ExtractionError(ValueError):
    pass


@dataclass(frozen=True)
class Extraction:
    program: Program
    text: str  # the kept statements, one per line
    dropped: tuple  # spans of the response that were discarded


def _split_statements(text: str) -> list:
    """Cut at statement-ending periods (not ``..``, not inside comments or brackets)."""
    out = []
    start = 0
    depth = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "%":
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth = max(0, depth - 1)
        elif ch == "." and depth == 0:
            if i + 1 < n and text[i + 1] == ".":
                i += 2
                continue
            if i + 1 == n or text[i + 1].isspace() or text[i + 1] == "%":
                out.append(text[start:i + 1])
                start = i + 1
        i += 1
    if text[start:].strip():
        out.append(text[start:])
    return out


def _strip_comments(s: str) -> str:
    return "\n".join(line.split("%", 1)[0] for line in s.splitlines())


def _parses(s: str) -> bool:
    try:
        parse_program(s)
        return True
    except (ASPSyntaxError, ValueError):
        return False


def extract_asp_report(raw: str) -> Extraction:
    dropped = []
    text = raw
    marks = list(_OUTPUT.finditer(text))
    if marks:
        head = text[:marks[-1].end()]
        if head.strip():
            dropped.append(head.strip())
        text = text[marks[-1].end():]
    fences = list(_FENCE.finditer(text))
    if fences:
        pos = 0
        for m in fences:
            if text[pos:m.start()].strip():
                dropped.append(text[pos:m.start()].strip())
            pos = m.end()
        if text[pos:].strip():
            dropped.append(text[pos:].strip())
        text = "\n".join(m.group(1) for m in fences)
    kept = []
    for span in _split_statements(text):
        body = _strip_comments(span).strip()
        if not body:
            continue
        if _parses(body):
            kept.append(body)
            continue
        # prose glued to a statement: retry from each later line
        lines = body.splitlines()
        for k in range(1, len(lines)):
            tail = "\n".join(lines[k:]).strip()
            if tail and _parses(tail):
                dropped.append("\n".join(lines[:k]).strip())
                kept.append(tail)
                break
        else:
            dropped.append(body)
    if not kept:
        raise ExtractionError("no parseable ASP statement in the response")
    joined = "\n".join(kept) + "\n"
    return Extraction(parse_program(joined), joined, tuple(dropped))


def extract_asp(raw: str) -> Program:
    return extract_asp_report(raw).program
