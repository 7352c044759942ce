"""End to end: translate rules and state, union, ground, solve, decode.

``solve_puzzle`` never raises for a failing stage.  The failure is recorded in
the returned Trace under the stage's name, and the answer is ``None``.

Trace stages, in order:

* ``rule 1`` .. ``rule K`` (translation of each rule)
* ``state`` (translation of the instance)
* ``union``
* ``ground``
* ``solve``
* ``decode``

For goal recognition, ``ground`` and ``solve`` repeat once per horizon tried.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Optional

from .asp import (
    Program,
    SolveOptions,
    SolveResult,
    ground,
    merge_programs,
    parse_program,
    parse_term,
    solve,
)
from .asp.syntax import Atom, Disjunction, Fun, Num, Rule
from .puzzles import GRID_KINDS, TASK_KINDS, BlackMask, Grid
from .translate import (
    TEMPLATE_VERSION,
    ExampleBank,
    LlmConfig,
    PuzzleInstance,
    Usage,
    build_rule_prompt,
    build_state_prompt,
    encoding_sections,
    extract_asp_report,
    llm_complete,
    reference_state_text,
    strip_facts,
)

__all__ = [
    "TranslatorChoice",
    "Stage",
    "Trace",
    "AnswerInstance",
    "DecodeError",
    "RuleCache",
    "decode_answer",
    "solve_puzzle",
    "translate_puzzle",
    "translate_rules",
    "program_text",
    "gr_horizon_bound",
]

TRANSLATORS = ("reference", "llm")


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class TranslatorChoice:
    """Which translator handles the rules and which handles the state."""

    rules: str = "reference"
    state: str = "reference"
    llm: Optional[LlmConfig] = None

    def __post_init__(self):
        for part in (self.rules, self.state):
            if part not in TRANSLATORS:
                raise ValueError(f"translator must be one of {TRANSLATORS}, got {part!r}")
        if "llm" in (self.rules, self.state) and self.llm is None:
            raise ValueError("LLM translation needs an LlmConfig")

    @classmethod
    def reference(cls) -> "TranslatorChoice":
        return cls()

    @classmethod
    def with_llm(cls, cfg: LlmConfig) -> "TranslatorChoice":
        return cls("llm", "llm", cfg)

    @property
    def mode(self) -> str:
        if self.rules == self.state:
            return self.rules
        return "hybrid"


@dataclass
class Stage:
    name: str
    ok: bool = True
    prompt: Optional[str] = None
    raw: Optional[str] = None  # LLM response text
    program: Optional[str] = None  # the program text this stage produced
    dropped: tuple = ()
    usage: Usage = field(default_factory=Usage)
    truncated: bool = False
    cached: bool = False
    info: dict = field(default_factory=dict)
    error: Optional[str] = None
    wall_ms: Optional[float] = None

    def to_dict(self, timing: bool) -> dict:
        d = {"name": self.name, "ok": self.ok, "usage": self.usage.to_dict()}
        for key in ("prompt", "raw", "program", "error"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        if self.dropped:
            d["dropped"] = list(self.dropped)
        if self.truncated:
            d["truncated"] = True
        if self.cached:
            d["cached"] = True
        if self.info:
            d["info"] = self.info
        if timing and self.wall_ms is not None:
            d["wall_ms"] = round(self.wall_ms, 3)
        return d


@dataclass(frozen=True)
class AnswerInstance:
    """Sudoku/Fillomino: ``grid``.  Hitori: the given ``grid`` plus ``mask``.

    Blocks World: ``label``.  A grid puzzle without any answer set has no grid.
    """

    kind: str
    grid: Optional[Grid] = None
    mask: Optional[BlackMask] = None
    label: Optional[bool] = None

    @property
    def solved(self) -> bool:
        if self.kind in TASK_KINDS:
            return self.label is not None
        if self.kind == "hitori":
            return self.mask is not None
        return self.grid is not None

    @property
    def value(self):
        """What the verifiers and the oracle score: a Grid, BlackMask or bool."""
        if self.kind in TASK_KINDS:
            return self.label
        return self.mask if self.kind == "hitori" else self.grid

    def to_text(self) -> str:
        v = self.value
        if v is None:
            return "no solution"
        if isinstance(v, bool):
            return "True" if v else "False"
        return v.to_text()


@dataclass
class Trace:
    kind: str
    mode: str
    question: str
    stages: list = field(default_factory=list)
    answer: Optional[str] = None
    error_stage: Optional[str] = None
    timing: bool = False

    @property
    def ok(self) -> bool:
        return self.error_stage is None

    @property
    def usage(self) -> Usage:
        total = Usage()
        for s in self.stages:
            total = total + s.usage
        return total

    @property
    def wall_ms(self) -> float:
        return sum(s.wall_ms or 0.0 for s in self.stages)

    def stage(self, name: str) -> Stage:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "mode": self.mode,
            "question": self.question,
            "stages": [s.to_dict(self.timing) for s in self.stages],
            "answer": self.answer,
            "error_stage": self.error_stage,
            "usage": self.usage.to_dict(),
        }
        if self.timing:
            d["wall_ms"] = round(self.wall_ms, 3)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


class _StageFailed(Exception):
    pass


class _Recorder:
    def __init__(self, trace: Trace):
        self.trace = trace

    def run(self, name: str, fn):
        """Run ``fn(stage)``; on an exception, mark the trace failed at this stage."""
        st = Stage(name)
        self.trace.stages.append(st)
        t0 = time.perf_counter()
        try:
            return fn(st)
        except _StageFailed:
            raise
        except Exception as e:  # noqa: BLE001 - every failure is recorded, not raised
            st.ok = False
            st.error = f"{type(e).__name__}: {e}"
            self.trace.error_stage = name
            raise _StageFailed() from e
        finally:
            st.wall_ms = (time.perf_counter() - t0) * 1000


# ---------------------------------------------------------------------------
# Translation
# ---------------------------------------------------------------------------


class RuleCache:
    """Translated rules keyed by (kind, bank digest, template version, translator, model)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._data: dict = {}

    @staticmethod
    def key(p: PuzzleInstance, bank: ExampleBank, tc: TranslatorChoice) -> tuple:
        model = tc.llm.model if tc.rules == "llm" else None
        return (p.kind, bank.digest(), TEMPLATE_VERSION, tc.rules, model, p.background, p.rules)

    def get(self, key):
        with self._lock:
            return self._data.get(key)

    def put(self, key, stages: list):
        with self._lock:
            self._data.setdefault(key, stages)
            return self._data[key]

    def __len__(self) -> int:
        return len(self._data)


def _llm_stage(st: Stage, prompt: str, cfg: LlmConfig) -> Program:
    st.prompt = prompt
    comp = llm_complete(prompt, cfg)
    st.raw = comp.text
    st.usage = comp.usage
    st.truncated = comp.truncated
    ex = extract_asp_report(comp.text)
    st.program = ex.text
    st.dropped = ex.dropped
    return ex.program


def _reference_rule_sections(p: PuzzleInstance) -> list:
    sections = encoding_sections(p.kind)
    if len(sections) != len(p.rules):
        raise ValueError(f"{p.kind}: {len(p.rules)} rules but the reference encoding has {len(sections)} sections")
    return sections


def _rule_stages(rec: _Recorder, p: PuzzleInstance, bank: ExampleBank, tc: TranslatorChoice):
    for i in range(1, len(p.rules) + 1):
        def one(st, i=i):
            if tc.rules == "reference":
                st.program = _reference_rule_sections(p)[i - 1]
                parse_program(st.program)
            else:
                _llm_stage(st, build_rule_prompt(bank, p, i), tc.llm)
        rec.run(f"rule {i}", one)


def translate_rules(p: PuzzleInstance, bank: ExampleBank, tc: TranslatorChoice) -> Trace:
    """Only the rule stages; check ``.ok`` / ``.error_stage`` on the result."""
    trace = Trace(p.kind, tc.mode, p.question)
    try:
        _rule_stages(_Recorder(trace), p, bank, tc)
    except _StageFailed:
        pass
    return trace


def _translate_state(st: Stage, p: PuzzleInstance, bank: ExampleBank, tc: TranslatorChoice) -> Program:
    if tc.state == "reference":
        st.program = reference_state_text(p.kind, p.question)
        return parse_program(st.program)
    return _llm_stage(st, build_state_prompt(bank, p), tc.llm)


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------


def _int_args(sym: str, name: str, arity: int) -> Optional[tuple]:
    t = parse_term(sym)
    if not isinstance(t, Fun) or t.name != name or len(t.args) != arity:
        return None
    if not all(isinstance(a, Num) for a in t.args):
        raise DecodeError(f"non-numeric arguments in {sym}")
    return tuple(a.value for a in t.args)


def _given_grid(p: PuzzleInstance) -> Grid:
    return p.parsed()


def decode_answer(kind: str, m, p: PuzzleInstance) -> AnswerInstance:
    """Read an answer set back into the puzzle's answer form.

    Grids read ``pos(r, c, v)``.  Hitori reads ``black(r, c)`` over the given
    grid.  Blocks World maps "a model exists" to True.  For goal recognition,
    the caller passes a model only when the cost comparison holds.
    """
    if kind != p.kind:
        raise ValueError(f"answer kind {kind!r} does not match puzzle kind {p.kind!r}")
    if kind in TASK_KINDS:
        return AnswerInstance(kind, label=m is not None)
    if kind not in GRID_KINDS:
        raise ValueError(f"unknown puzzle kind {kind!r}")
    if m is None:
        return AnswerInstance(kind)
    given = _given_grid(p)
    n = given.size

    def in_range(r, c, sym):
        if not (1 <= r <= n and 1 <= c <= n):
            raise DecodeError(f"{sym} is outside the {n}x{n} grid")

    if kind == "hitori":
        black = []
        for sym in m.symbols:
            rc = _int_args(sym, "black", 2)
            if rc is not None:
                in_range(*rc, sym)
                black.append(rc)
        return AnswerInstance(kind, grid=given, mask=BlackMask.from_cells(n, black))
    cells: dict = {}
    for sym in m.symbols:
        rcv = _int_args(sym, "pos", 3)
        if rcv is None:
            continue
        r, c, v = rcv
        in_range(r, c, sym)
        if not 0 <= v <= 9:
            raise DecodeError(f"{sym} has a value outside 0..9")
        if (r, c) in cells:
            raise DecodeError(f"cell ({r},{c}) has two values: {cells[r, c]} and {v}")
        cells[r, c] = v
    missing = [(r, c) for r in range(1, n + 1) for c in range(1, n + 1) if (r, c) not in cells]
    if missing:
        raise DecodeError(f"no value for cell {missing[0]} ({len(missing)} cells missing)")
    rows = [[cells[r, c] for c in range(1, n + 1)] for r in range(1, n + 1)]
    return AnswerInstance(kind, grid=Grid.from_rows(rows, kind))


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------


def _facts_of(program: Program, predicate: str) -> list:
    out = []
    for s in program.statements:
        if isinstance(s, Rule) and not s.body and isinstance(s.head, Disjunction) and len(s.head.atoms) == 1:
            a = s.head.atoms[0]
            if isinstance(a, Atom) and a.predicate == predicate and not a.negated:
                out.append(a)
    return out


def gr_horizon_bound(program: Program) -> tuple:
    """(observed action count, longest horizon to try) for a goal recognition program.

    An optimal Blocks World plan never needs more than two moves per block
    (put everything on the table, then build), so 2·|blocks| bounds it.
    """
    k = len(set(_facts_of(program, "occurs")))
    blocks = len(set(_facts_of(program, "block")))
    return k, max(k, 2 * blocks)


def _solve_stage(st: Stage, g, opts: SolveOptions) -> SolveResult:
    res = solve(g, opts)
    st.info = {"status": res.status, "models": len(res.models)}
    if res.cost is not None:
        st.info["cost"] = res.cost
    if res.status not in ("SAT", "UNSAT", "OPTIMUM"):
        raise TimeoutError(f"solver stopped with status {res.status}")
    return res


def _ground_stage(st: Stage, program: Program, consts: Optional[dict] = None):
    g = ground(program, consts=consts)
    st.info = {"atoms": g.num_atoms, "rules": len(g.rules)}
    if consts:
        st.info["consts"] = dict(consts)
    return g


def _goal_recognition(rec: _Recorder, program: Program, opts: SolveOptions):
    """Label True iff the observations extend to a plan as short as an optimal one.

    The loop searches for the least horizon ``h`` at which the observed prefix
    extends to a goal-reaching plan.  The answer is True iff, at ``h - 1``, no
    plan exists without the observations.  This is the same cost comparison
    as two optimization solves, but each solve here is a plain satisfiability
    check at a fixed horizon.
    """
    k, bound = gr_horizon_bound(program)
    sat_opts = replace(opts, optimize=False, max_models=1)
    free = strip_facts(program, "occurs")
    found = None
    for h in range(k, bound + 1):
        g = rec.run(f"ground h={h}", lambda st, h=h: _ground_stage(st, program, {"num_step": h}))
        res = rec.run(f"solve h={h}", lambda st, g=g: _solve_stage(st, g, sat_opts))
        if res.satisfiable:
            found = (h, res.models[0])
            break
    if found is None:
        return None
    h, model = found
    if h == 0:
        return model
    g = rec.run(f"ground free h={h - 1}", lambda st: _ground_stage(st, free, {"num_step": h - 1}))
    res = rec.run(f"solve free h={h - 1}", lambda st: _solve_stage(st, g, sat_opts))
    return None if res.satisfiable else model


def _translate(rec: _Recorder, p: PuzzleInstance, bank: ExampleBank, tc: TranslatorChoice, cache) -> Program:
    trace = rec.trace
    key = RuleCache.key(p, bank, tc) if cache is not None else None
    hit = cache.get(key) if cache is not None else None
    if hit is not None:
        for s in hit:
            trace.stages.append(replace(s, usage=Usage(), cached=True, wall_ms=0.0))
            if not s.ok:
                trace.error_stage = s.name
                raise _StageFailed()
    else:
        start = len(trace.stages)
        try:
            _rule_stages(rec, p, bank, tc)
        finally:
            if cache is not None:
                # failures are cached too, so a broken rule is not re-billed per instance
                cache.put(key, list(trace.stages[start:]))
    state_prog = rec.run("state", lambda st: _translate_state(st, p, bank, tc))

    def union(st):
        progs = [parse_program(s.program) for s in trace.stages if s.name.startswith("rule ")]
        prog = merge_programs(*progs, state_prog)
        st.info = {"statements": len(prog.statements)}
        return prog

    return rec.run("union", union)


def _check_bank(p: PuzzleInstance, bank: ExampleBank):
    if bank.kind != p.kind:
        raise ValueError(f"bank is for {bank.kind!r}, puzzle is {p.kind!r}")


def translate_puzzle(
    p: PuzzleInstance,
    bank: ExampleBank,
    tc: TranslatorChoice,
    cache: Optional[RuleCache] = None,
    timing: bool = False,
) -> tuple:
    """Only the translation half: ``(program, trace)``, program None on failure."""
    _check_bank(p, bank)
    trace = Trace(p.kind, tc.mode, p.question, timing=timing)
    try:
        return _translate(_Recorder(trace), p, bank, tc, cache), trace
    except _StageFailed:
        return None, trace


def solve_puzzle(
    p: PuzzleInstance,
    bank: ExampleBank,
    tc: TranslatorChoice,
    opts: Optional[SolveOptions] = None,
    cache: Optional[RuleCache] = None,
    timing: bool = False,
) -> tuple:
    """Returns ``(answer, trace)``.  ``answer`` is None when a stage failed."""
    _check_bank(p, bank)
    opts = opts or SolveOptions()
    trace = Trace(p.kind, tc.mode, p.question, timing=timing)
    rec = _Recorder(trace)
    try:
        program = _translate(rec, p, bank, tc, cache)
        if p.kind == "goal_recognition":
            model = _goal_recognition(rec, program, opts)
        else:
            g = rec.run("ground", lambda st: _ground_stage(st, program))
            res = rec.run("solve", lambda st: _solve_stage(st, g, opts))
            model = res.models[0] if res.models else None
        answer = rec.run("decode", lambda st: decode_answer(p.kind, model, p))
    except _StageFailed:
        return None, trace
    trace.answer = answer.to_text()
    return answer, trace


def program_text(trace: Trace) -> str:
    """The translated program of a trace: every rule and state program text, in stage order."""
    return "".join(s.program for s in trace.stages if s.program is not None)
