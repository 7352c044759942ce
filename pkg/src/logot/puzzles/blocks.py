"""Blocks World: states, actions, goals, the English surface grammar, and an
exact simulator/planner used as ground truth for the four reasoning tasks.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Union

__all__ = [
    "TABLE",
    "TASK_KINDS",
    "COLORS",
    "EXTRA_COLORS",
    "BWParseError",
    "BWStateError",
    "BWState",
    "BWAction",
    "Prop",
    "GoalLiteral",
    "GoalFormula",
    "IllegalMove",
    "TaskInstance",
    "parse_bw_sentences",
    "parse_bw_state",
    "parse_bw_actions",
    "parse_bw_goal",
    "parse_task",
    "format_task",
    "bw_apply",
    "bw_run",
    "bw_optimal_plan_length",
    "bw_oracle_label",
    "state_text",
    "MAX_PLAN_BLOCKS",
]

TABLE = "table"
TASK_KINDS = ("projection", "legality", "plan_verification", "goal_recognition")

# colour names seen in the example tasks, then extra names for generation
COLORS = (
    "tan", "turquoise", "teal", "brown", "green", "purple", "pink", "blue", "red",
    "navy", "silver", "violet", "magenta", "olive", "lime", "aquamarine", "indigo",
)
EXTRA_COLORS = ("orange", "yellow", "white", "black", "gray", "cyan", "maroon", "gold", "beige", "coral")

MAX_PLAN_BLOCKS = 7


class BWParseError(ValueError):
    def __init__(self, message: str, sentence: str = ""):
        self.sentence = sentence
        super().__init__(f"{message}: {sentence!r}" if sentence else message)


class BWStateError(ValueError):
    pass


# ---------------------------------------------------------------------------
# State, actions, goals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BWState:
    """Placement of each block; ``clear`` is derived."""

    placement: tuple  # sorted ((block, location), ...)

    def __post_init__(self):
        items = tuple(sorted(dict(self.placement).items()))
        object.__setattr__(self, "placement", items)
        on = dict(items)
        if TABLE in on:
            raise BWStateError("the table is not a block")
        for b, loc in on.items():
            if loc != TABLE and loc not in on:
                raise BWStateError(f"{b} is on unknown block {loc}")
            if loc == b:
                raise BWStateError(f"{b} is on itself")
        supports = {}
        for b, loc in on.items():
            if loc != TABLE:
                if loc in supports:
                    raise BWStateError(f"{supports[loc]} and {b} are both on {loc}")
                supports[loc] = b
        for b in on:
            seen = set()
            x = b
            while x != TABLE:
                if x in seen:
                    raise BWStateError(f"cyclic stacking through {b}")
                seen.add(x)
                x = on[x]

    @classmethod
    def from_dict(cls, on: dict) -> "BWState":
        return cls(tuple(on.items()))

    @property
    def on(self) -> dict:
        return dict(self.placement)

    @property
    def blocks(self) -> frozenset:
        return frozenset(b for b, _ in self.placement)

    @property
    def clear(self) -> frozenset:
        covered = {loc for _, loc in self.placement}
        return frozenset(b for b, _ in self.placement if b not in covered)

    def holds(self, prop: "Prop") -> bool:
        if prop.kind == "on":
            return dict(self.placement).get(prop.block) == prop.location
        return prop.block in self.blocks and prop.block in self.clear


@dataclass(frozen=True)
class BWAction:
    block: str
    source: str
    dest: str

    def __post_init__(self):
        if self.block == TABLE:
            raise ValueError("the table cannot be moved")
        if self.block in (self.source, self.dest):
            raise ValueError(f"move({self.block}, {self.source}, {self.dest}): a block cannot move from or onto itself")
        if self.source == self.dest:
            raise ValueError(f"move({self.block}, {self.source}, {self.dest}): source equals destination")

    def __str__(self) -> str:
        return f"move({self.block}, {self.source}, {self.dest})"

    def sentence(self) -> str:
        src = "the table" if self.source == TABLE else f"the {self.source} block"
        if self.dest == TABLE:
            return f"Jane moves the {self.block} block from {src} onto the table."
        return f"Jane moves the {self.block} block from {src} to the {self.dest} block."


@dataclass(frozen=True)
class Prop:
    """``on(block, location)`` or ``clear(block)`` (location is None)."""

    kind: str
    block: str
    location: Optional[str] = None

    def __post_init__(self):
        if self.kind == "on":
            if self.location is None:
                raise ValueError("on/2 needs a location")
            if self.location == self.block:
                raise ValueError(f"on({self.block}, {self.block}) can never hold")
        elif self.kind == "clear":
            if self.location is not None:
                raise ValueError("clear/1 takes no location")
        else:
            raise ValueError(f"unknown proposition {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == "on":
            return f"on({self.block}, {self.location})"
        return f"clear({self.block})"

    def sentence(self, negated: bool = False) -> str:
        verb = "is not" if negated else "is"
        if self.kind == "clear":
            return f"The {self.block} block {verb} clear"
        if self.location == TABLE:
            return f"The {self.block} block {verb} on the table"
        return f"The {self.block} block {verb} on top of the {self.location} block"


@dataclass(frozen=True)
class GoalLiteral:
    prop: Prop
    positive: bool = True

    def __str__(self) -> str:
        return str(self.prop) if self.positive else f"not {self.prop}"


@dataclass(frozen=True)
class GoalFormula:
    literals: tuple

    def __post_init__(self):
        object.__setattr__(self, "literals", tuple(self.literals))
        if not self.literals:
            raise ValueError("a goal needs at least one proposition")

    def satisfied(self, state: BWState) -> bool:
        return all(state.holds(l.prop) == l.positive for l in self.literals)

    def blocks(self) -> set:
        out = set()
        for l in self.literals:
            out.add(l.prop.block)
            if l.prop.location not in (None, TABLE):
                out.add(l.prop.location)
        return out

    def text(self, style: str = "and") -> str:
        """English rendering; ``style`` "and" joins with "and", "sentences" with periods."""
        parts = [l.prop.sentence(not l.positive) for l in self.literals]
        if style == "sentences":
            return " ".join(p + "." for p in parts)
        first, rest = parts[0], [p[0].lower() + p[1:] for p in parts[1:]]
        return " and ".join([first] + rest) + "."

    def __str__(self) -> str:
        return " & ".join(str(l) for l in self.literals)


@dataclass(frozen=True)
class IllegalMove:
    """Returned by :func:`bw_apply` when a precondition fails."""

    action: BWAction
    reason: str

    def __bool__(self) -> bool:
        return False


# ---------------------------------------------------------------------------
# Surface grammar
# ---------------------------------------------------------------------------

_NAME = r"([a-z][a-z0-9_]*)"
_ON_TABLE = re.compile(rf"^the {_NAME} block is (not )?on the table$")
_ON_BLOCK = re.compile(rf"^the {_NAME} block is (not )?on top of the {_NAME} block$")
_CLEAR = re.compile(rf"^the {_NAME} block is (not )?clear$")
_MOVE = re.compile(
    rf"^jane moves the {_NAME} block from (?:the table|the {_NAME} block) "
    rf"(?:onto the table|to the table|to the {_NAME} block)$"
)


def _sentences(text: str) -> list:
    return [s.strip() for s in re.split(r"\.(?:\s+|$)", text.strip()) if s.strip()]


def _norm(sentence: str) -> str:
    return re.sub(r"\s+", " ", sentence.strip().rstrip(".")).lower()


def _parse_prop(sentence: str):
    s = _norm(sentence)
    m = _ON_TABLE.match(s)
    if m:
        return Prop("on", m.group(1), TABLE), m.group(2) is None
    m = _ON_BLOCK.match(s)
    if m:
        return Prop("on", m.group(1), m.group(3)), m.group(2) is None
    m = _CLEAR.match(s)
    if m:
        return Prop("clear", m.group(1)), m.group(2) is None
    raise BWParseError("unrecognised proposition", sentence)


def parse_bw_sentences(text: str) -> list:
    """State sentences in order, as positive :class:`Prop` values."""
    out = []
    for sentence in _sentences(text):
        prop, positive = _parse_prop(sentence)
        if not positive:
            raise BWParseError("state descriptions cannot be negative", sentence)
        out.append(prop)
    return out


def parse_bw_state(text: str) -> BWState:
    props = parse_bw_sentences(text)
    on = {}
    mentioned = []
    for p in props:
        mentioned.append(p.block)
        if p.kind == "on":
            if p.location != TABLE:
                mentioned.append(p.location)
            if p.block in on and on[p.block] != p.location:
                raise BWStateError(f"{p.block} is on both {on[p.block]} and {p.location}")
            on[p.block] = p.location
    missing = [b for b in dict.fromkeys(mentioned) if b not in on]
    if missing:
        raise BWStateError(f"no location given for {', '.join(missing)}")
    state = BWState.from_dict(on)
    for p in props:
        if p.kind == "clear" and p.block not in state.clear:
            raise BWStateError(f"{p.block} is said to be clear but something is on it")
    return state


def parse_bw_actions(text: str) -> list:
    out = []
    for sentence in _sentences(text):
        m = _MOVE.match(_norm(sentence))
        if not m:
            raise BWParseError("unrecognised action", sentence)
        block, src, dst = m.group(1), m.group(2) or TABLE, m.group(3) or TABLE
        try:
            out.append(BWAction(block, src, dst))
        except ValueError as e:
            raise BWParseError(str(e), sentence) from None
    return out


def parse_bw_goal(text: str) -> GoalFormula:
    literals = []
    for sentence in _sentences(text):
        for part in re.split(r"\s+and\s+", sentence.strip()):
            if not re.match(r"(?i)the\s", part.strip()):
                part = "The " + part.strip()
            prop, positive = _parse_prop(part)
            literals.append(GoalLiteral(prop, positive))
    if not literals:
        raise BWParseError("empty goal")
    return GoalFormula(tuple(literals))


def state_text(state: BWState, order=None) -> str:
    """One sentence per on-fact and per clear block, in ``order`` (a list of Props) if given."""
    if order is None:
        order = [Prop("on", b, loc) for b, loc in state.placement] + [Prop("clear", b) for b in sorted(state.clear)]
    return " ".join(p.sentence() + "." for p in order)


# ---------------------------------------------------------------------------
# Simulation and planning
# ---------------------------------------------------------------------------


def bw_apply(state: BWState, action: BWAction) -> Union[BWState, IllegalMove]:
    on = state.on
    b = action.block
    if b not in on:
        return IllegalMove(action, f"{b} is not a block in this state")
    clear = state.clear
    if b not in clear:
        return IllegalMove(action, f"{b} is not clear")
    if on[b] != action.source:
        return IllegalMove(action, f"{b} is not on {action.source}")
    if action.dest != TABLE:
        if action.dest not in on:
            return IllegalMove(action, f"{action.dest} is not a block in this state")
        if action.dest not in clear:
            return IllegalMove(action, f"{action.dest} is not clear")
    on[b] = action.dest
    return BWState.from_dict(on)


def bw_run(state: BWState, actions) -> tuple:
    """Apply actions in order; returns (final state or None, index of first illegal action or None)."""
    for i, a in enumerate(actions):
        nxt = bw_apply(state, a)
        if isinstance(nxt, IllegalMove):
            return None, i
        state = nxt
    return state, None


def _legal_moves(state: BWState):
    on = state.on
    clear = sorted(state.clear)
    for b in clear:
        src = on[b]
        for dst in [TABLE] + clear:
            if dst != b and dst != src:
                yield BWAction(b, src, dst)


def bw_optimal_plan_length(state: BWState, goal: GoalFormula) -> Optional[int]:
    """Fewest moves to reach a state satisfying ``goal`` (BFS); None if unreachable."""
    if len(state.blocks) > MAX_PLAN_BLOCKS:
        raise ValueError(f"planning is limited to {MAX_PLAN_BLOCKS} blocks")
    if goal.satisfied(state):
        return 0
    seen = {state}
    frontier = deque([(state, 0)])
    while frontier:
        s, d = frontier.popleft()
        for a in _legal_moves(s):
            nxt = bw_apply(s, a)
            if nxt in seen:
                continue
            if goal.satisfied(nxt):
                return d + 1
            seen.add(nxt)
            frontier.append((nxt, d + 1))
    return None


# ---------------------------------------------------------------------------
# Tasks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TaskInstance:
    kind: str
    state: BWState
    actions: tuple = ()
    query: Optional[GoalFormula] = None
    label: Optional[bool] = None
    texts: dict = field(default_factory=dict, compare=False, hash=False)  # original sentences per section

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        if self.kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {self.kind!r}")
        if self.kind == "legality":
            if self.query is not None:
                raise ValueError("legality tasks have no goal")
        elif self.query is None:
            raise ValueError(f"{self.kind} tasks need a goal")

    def section(self, name: str) -> str:
        """Text of a section, falling back to a rendering of the parsed value."""
        if name in self.texts:
            return self.texts[name]
        if name == "state":
            return state_text(self.state)
        if name == "actions":
            return " ".join(a.sentence() for a in self.actions)
        if name == "goal":
            if self.query is None:
                return ""
            return self.query.text("sentences" if self.kind == "projection" else "and")
        raise KeyError(name)


def bw_oracle_label(t: TaskInstance) -> bool:
    final, bad = bw_run(t.state, t.actions)
    if t.kind == "legality":
        return bad is None
    if bad is not None:
        return False
    if t.kind in ("projection", "plan_verification"):
        return t.query.satisfied(final)
    best = bw_optimal_plan_length(t.state, t.query)
    if best is None:
        return False
    rest = bw_optimal_plan_length(final, t.query)
    return rest is not None and len(t.actions) + rest == best


_SECTION_ALIASES = {
    "task": "task",
    "kind": "task",
    "state": "state",
    "actions": "actions",
    "action sequence": "actions",
    "observations": "actions",
    "goal": "goal",
    "label": "label",
}


def parse_task(text: str, kind: Optional[str] = None) -> TaskInstance:
    """Read a task file: ``key: value`` sections (task, state, actions, goal, label).

    The headings used by the published examples are accepted as well
    (``Action sequence``, ``Observations``, and ``Query``, which means the
    goal for projection and the actions otherwise).
    """
    sections: dict = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip().lstrip("-*• ").strip()
        if not line:
            continue
        m = re.match(r"^([A-Za-z][A-Za-z ]*?)\s*:\s*(.*)$", line)
        key = m.group(1).strip().lower() if m else None
        if m and (key in _SECTION_ALIASES or key == "query"):
            current = key
            sections[current] = m.group(2).strip()
        elif current is not None:
            sections[current] = (sections[current] + " " + line).strip()
        else:
            raise BWParseError("text outside any section", line)
    kind = kind or sections.get("task") or sections.get("kind")
    if kind is None:
        raise BWParseError("task kind not given")
    kind = kind.strip().lower().replace(" ", "_").replace("-", "_")
    if "query" in sections:
        target = "goal" if kind == "projection" else "actions"
        if target in sections:
            raise BWParseError(f"both 'query' and '{target}' sections present")
        sections[target] = sections.pop("query")
    texts = {}
    for key, value in sections.items():
        name = _SECTION_ALIASES.get(key, key)
        if name in ("state", "actions", "goal"):
            texts[name] = value
    label = sections.get("label")
    if label is not None:
        word = label.strip().rstrip(".").lower()
        if word not in ("true", "false"):
            raise BWParseError("label must be True or False", label)
        label = word == "true"
    state = parse_bw_state(texts.get("state", ""))
    actions = parse_bw_actions(texts.get("actions", ""))
    goal = parse_bw_goal(texts["goal"]) if texts.get("goal", "").strip() else None
    return TaskInstance(kind, state, tuple(actions), goal, label, texts)


def format_task(t: TaskInstance) -> str:
    lines = [f"task: {t.kind}", f"state: {t.section('state')}", f"actions: {t.section('actions')}"]
    if t.query is not None:
        lines.append(f"goal: {t.section('goal')}")
    if t.label is not None:
        lines.append(f"label: {'True' if t.label else 'False'}")
    return "\n".join(lines) + "\n"
