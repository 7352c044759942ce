"""Seeded instance generators.

Grid puzzles are built solution-first.  Sudoku clues are removed one at a
time while a small exact counter still finds a unique completion.  Blocks
World tasks come from random legal walks; negative cases are mutations
re-checked against the oracle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Union

from .blocks import (
    COLORS,
    EXTRA_COLORS,
    TABLE,
    TASK_KINDS,
    BWAction,
    BWState,
    GoalFormula,
    GoalLiteral,
    IllegalMove,
    Prop,
    TaskInstance,
    _legal_moves,
    bw_apply,
    bw_oracle_label,
    bw_run,
    state_text,
)
from .grids import BlackMask, Grid

__all__ = [
    "GenerationError",
    "Generated",
    "generate_instance",
    "count_sudoku_solutions",
    "bw_optimal_plan",
    "DEFAULT_PARAMS",
]

MAX_TRIES = 1000

DEFAULT_PARAMS = {
    "sudoku": {"density": 0.35},
    "hitori": {"size": 6},
    "fillomino": {"size": 5, "density": 0.5},
    "projection": {"blocks": 5, "plan_length": 3},
    "legality": {"blocks": 5, "plan_length": 3},
    "plan_verification": {"blocks": 5, "plan_length": 3},
    "goal_recognition": {"blocks": 5, "plan_length": 3},
}


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Generated:
    kind: str
    instance: Union[Grid, TaskInstance]
    truth: Union[Grid, BlackMask, bool]


def generate_instance(kind: str, params: Optional[dict] = None, seed: int = 0) -> Generated:
    if kind not in DEFAULT_PARAMS:
        raise ValueError(f"unknown puzzle kind {kind!r}")
    p = dict(DEFAULT_PARAMS[kind])
    p.update(params or {})
    rng = random.Random(f"{kind}:{seed}")
    if kind == "sudoku":
        return _gen_sudoku(rng, float(p["density"]))
    if kind == "hitori":
        return _gen_hitori(rng, int(p["size"]))
    if kind == "fillomino":
        return _gen_fillomino(rng, int(p["size"]), float(p["density"]))
    return _gen_bw(rng, kind, int(p["blocks"]), int(p["plan_length"]), p.get("label"))


# ---------------------------------------------------------------------------
# Sudoku
# ---------------------------------------------------------------------------


def _box(r, c):
    return (r // 3) * 3 + c // 3


def count_sudoku_solutions(cells, limit: int = 2) -> int:
    """Number of completions of a 9x9 grid (0 = empty), counting up to ``limit``."""
    grid = [list(row) for row in cells]
    rows, cols, boxes = [0] * 9, [0] * 9, [0] * 9
    empty = []
    for r in range(9):
        for c in range(9):
            v = grid[r][c]
            if v:
                bit = 1 << v
                if rows[r] & bit or cols[c] & bit or boxes[_box(r, c)] & bit:
                    return 0
                rows[r] |= bit
                cols[c] |= bit
                boxes[_box(r, c)] |= bit
            else:
                empty.append((r, c))
    full = 0b1111111110
    count = 0

    def search(todo):
        nonlocal count
        if not todo:
            count += 1
            return count >= limit
        best, best_opts, best_n = None, 0, 10
        for i, (r, c) in enumerate(todo):
            opts = full & ~(rows[r] | cols[c] | boxes[_box(r, c)])
            n = bin(opts).count("1")
            if n < best_n:
                best, best_opts, best_n = i, opts, n
                if n <= 1:
                    break
        if best_n == 0:
            return False
        r, c = todo[best]
        rest = todo[:best] + todo[best + 1:]
        b = _box(r, c)
        for v in range(1, 10):
            bit = 1 << v
            if best_opts & bit:
                rows[r] |= bit
                cols[c] |= bit
                boxes[b] |= bit
                stop = search(rest)
                rows[r] &= ~bit
                cols[c] &= ~bit
                boxes[b] &= ~bit
                if stop:
                    return True
        return False

    search(empty)
    return count


def _sudoku_full(rng):
    grid = [[0] * 9 for _ in range(9)]

    def fill(i):
        if i == 81:
            return True
        r, c = divmod(i, 9)
        digits = list(range(1, 10))
        rng.shuffle(digits)
        for v in digits:
            if all(grid[r][k] != v for k in range(9)) and all(grid[k][c] != v for k in range(9)):
                br, bc = 3 * (r // 3), 3 * (c // 3)
                if all(grid[br + a][bc + b] != v for a in range(3) for b in range(3)):
                    grid[r][c] = v
                    if fill(i + 1):
                        return True
                    grid[r][c] = 0
        return False

    fill(0)
    return grid


def _gen_sudoku(rng, density):
    if not 0 < density <= 1:
        raise ValueError("density must be in (0, 1]")
    solution = _sudoku_full(rng)
    puzzle = [row[:] for row in solution]
    target = max(17, round(density * 81))
    clues = 81
    cells = [(r, c) for r in range(9) for c in range(9)]
    rng.shuffle(cells)
    for r, c in cells:
        if clues <= target:
            break
        v = puzzle[r][c]
        puzzle[r][c] = 0
        if count_sudoku_solutions(puzzle, 2) != 1:
            puzzle[r][c] = v
        else:
            clues -= 1
    return Generated("sudoku", Grid.from_rows(puzzle, "sudoku"), Grid.from_rows(solution, "sudoku"))


# ---------------------------------------------------------------------------
# Hitori
# ---------------------------------------------------------------------------


def _neighbours(n, r, c):
    for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
        if 0 <= nr < n and 0 <= nc < n:
            yield nr, nc


def _white_connected(n, black) -> bool:
    whites = [(r, c) for r in range(n) for c in range(n) if (r, c) not in black]
    if not whites:
        return False
    seen = {whites[0]}
    stack = [whites[0]]
    while stack:
        cell = stack.pop()
        for nb in _neighbours(n, *cell):
            if nb not in black and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(whites)


def _latin_square(rng, n):
    rows = list(range(n))
    cols = list(range(n))
    syms = list(range(1, n + 1))
    rng.shuffle(rows)
    rng.shuffle(cols)
    rng.shuffle(syms)
    return [[syms[(rows[r] + cols[c]) % n] for c in range(n)] for r in range(n)]


def _gen_hitori(rng, n):
    if not 3 <= n <= 9:
        raise ValueError("hitori size must be 3..9")
    black = set()
    cells = [(r, c) for r in range(n) for c in range(n)]
    rng.shuffle(cells)
    target = max(1, (n * n) // 5)
    for cell in cells:
        if len(black) >= target:
            break
        if any(nb in black for nb in _neighbours(n, *cell)):
            continue
        black.add(cell)
        if not _white_connected(n, black):
            black.discard(cell)
    values = _latin_square(rng, n)
    for r, c in sorted(black):
        # a shaded cell repeats a white value of its row or column
        options = [values[r][k] for k in range(n) if (r, k) not in black and k != c]
        options += [values[k][c] for k in range(n) if (k, c) not in black and k != r]
        values[r][c] = rng.choice(options)
    mask = BlackMask.from_cells(n, [(r + 1, c + 1) for r, c in black])
    return Generated("hitori", Grid.from_rows(values, "hitori"), mask)


# ---------------------------------------------------------------------------
# Fillomino
# ---------------------------------------------------------------------------


def _fillomino_partition(rng, n):
    region = {}
    regions = []
    cells = [(r, c) for r in range(n) for c in range(n)]
    rng.shuffle(cells)
    for start in cells:
        if start in region:
            continue
        size = rng.choice([1, 2, 2, 3, 3, 4, 4, 5, 6])
        rid = len(regions)
        members = [start]
        region[start] = rid
        frontier = [nb for nb in _neighbours(n, *start) if nb not in region]
        while len(members) < size and frontier:
            cell = frontier.pop(rng.randrange(len(frontier)))
            if cell in region:
                continue
            region[cell] = rid
            members.append(cell)
            frontier += [nb for nb in _neighbours(n, *cell) if nb not in region]
        regions.append(members)
    # merge same-size neighbours until no two equal-sized regions touch
    while True:
        merged = False
        for (r, c), rid in sorted(region.items()):
            for nb in _neighbours(n, r, c):
                other = region[nb]
                if other != rid and len(regions[other]) == len(regions[rid]):
                    if len(regions[rid]) * 2 > 9:
                        return None
                    for cell in regions[other]:
                        region[cell] = rid
                    regions[rid] += regions[other]
                    regions[other] = []
                    merged = True
                    break
            if merged:
                break
        if not merged:
            break
    grid = [[0] * n for _ in range(n)]
    for (r, c), rid in region.items():
        grid[r][c] = len(regions[rid])
    return grid


def _gen_fillomino(rng, n, density):
    if not 3 <= n <= 9:
        raise ValueError("fillomino size must be 3..9")
    for _ in range(MAX_TRIES):
        solution = _fillomino_partition(rng, n)
        if solution is not None:
            break
    else:
        raise GenerationError("could not build a fillomino partition")
    puzzle = [row[:] for row in solution]
    for r in range(n):
        for c in range(n):
            if rng.random() >= density:
                puzzle[r][c] = 0
    return Generated("fillomino", Grid.from_rows(puzzle, "fillomino"), Grid.from_rows(solution, "fillomino"))


# ---------------------------------------------------------------------------
# Blocks World
# ---------------------------------------------------------------------------


def _random_state(rng, n) -> BWState:
    names = list(COLORS + EXTRA_COLORS)
    blocks = rng.sample(names, n)
    on = {}
    tops = []
    for b in blocks:
        if tops and rng.random() < 0.55:
            t = rng.choice(tops)
            on[b] = t
            tops.remove(t)
        else:
            on[b] = TABLE
        tops.append(b)
    return BWState.from_dict(on)


def _shuffled_state_text(rng, state: BWState) -> str:
    props = [Prop("on", b, loc) for b, loc in state.placement] + [Prop("clear", b) for b in sorted(state.clear)]
    rng.shuffle(props)
    return state_text(state, props)


def _random_walk(rng, state, length):
    actions = []
    for _ in range(length):
        moves = list(_legal_moves(state))
        a = rng.choice(moves)
        actions.append(a)
        state = bw_apply(state, a)
    return actions, state


def _random_props(rng, state: BWState, k: int, kinds=("on", "clear")):
    """``k`` distinct propositions that hold in ``state``."""
    props = []
    if "on" in kinds:
        props += [Prop("on", b, loc) for b, loc in state.placement]
    if "clear" in kinds:
        props += [Prop("clear", b) for b in sorted(state.clear)]
    return rng.sample(props, min(k, len(props)))


def _false_prop(rng, state: BWState, kinds=("on", "clear")):
    blocks = sorted(state.blocks)
    options = []
    if "on" in kinds:
        options += [Prop("on", b, loc) for b in blocks for loc in blocks + [TABLE] if loc != b and not state.holds(Prop("on", b, loc))]
    if "clear" in kinds:
        options += [Prop("clear", b) for b in blocks if b not in state.clear]
    return rng.choice(options)


def bw_optimal_plan(state: BWState, goal: GoalFormula, rng=None) -> Optional[list]:
    """One shortest plan (random tie-breaking when ``rng`` is given)."""
    from collections import deque

    if goal.satisfied(state):
        return []
    parent = {state: None}
    frontier = deque([state])
    while frontier:
        s = frontier.popleft()
        moves = list(_legal_moves(s))
        if rng is not None:
            rng.shuffle(moves)
        for a in moves:
            nxt = bw_apply(s, a)
            if nxt in parent:
                continue
            parent[nxt] = (s, a)
            if goal.satisfied(nxt):
                plan = []
                cur = nxt
                while parent[cur] is not None:
                    cur, act = parent[cur]
                    plan.append(act)
                return plan[::-1]
            frontier.append(nxt)
    return None


def _mutate_action(rng, state, actions):
    """Replace one action by a syntactically valid but (usually) illegal one."""
    i = rng.randrange(len(actions))
    before, bad = bw_run(state, actions[:i])
    a = actions[i]
    locs = sorted(before.blocks) + [TABLE]
    field_ = rng.choice(["block", "source", "dest"])
    for _ in range(50):
        b, s, d = a.block, a.source, a.dest
        if field_ == "block":
            b = rng.choice(sorted(before.blocks))
        elif field_ == "source":
            s = rng.choice(locs)
        else:
            d = rng.choice(locs)
        try:
            cand = BWAction(b, s, d)
        except ValueError:
            continue
        if isinstance(bw_apply(before, cand), IllegalMove):
            return actions[:i] + [cand] + actions[i + 1:]
    return None


def _gen_bw(rng, kind, n_blocks, length, label=None):
    if kind not in TASK_KINDS:
        raise ValueError(kind)
    if not 1 <= n_blocks <= len(COLORS) + len(EXTRA_COLORS):
        raise ValueError("block count out of range")
    want = rng.random() < 0.5 if label is None else bool(label)
    for _ in range(MAX_TRIES):
        t = _try_bw(rng, kind, n_blocks, length, want)
        if t is not None and bw_oracle_label(t) == want:
            return Generated(kind, t, want)
    raise GenerationError(f"could not generate a {kind} instance with label {want}")


def _try_bw(rng, kind, n_blocks, length, want):
    state = _random_state(rng, n_blocks)
    texts = {"state": _shuffled_state_text(rng, state)}
    if kind == "goal_recognition":
        return _try_gr(rng, state, texts, n_blocks, length, want)
    actions, final = _random_walk(rng, state, max(1, length))
    goal = None
    if kind == "legality":
        if not want:
            actions = _mutate_action(rng, state, actions)
            if actions is None:
                return None
    elif kind == "projection":
        props = _random_props(rng, final, rng.randint(1, 2))
        if not want:
            props[rng.randrange(len(props))] = _false_prop(rng, final)
        goal = GoalFormula(tuple(GoalLiteral(p) for p in props))
    else:  # plan verification: on-facts, possibly negated
        props = _random_props(rng, final, 2, kinds=("on",))
        lits = []
        for p in props:
            if rng.random() < 0.3:
                q = _false_prop(rng, final, kinds=("on",))
                lits.append(GoalLiteral(q, positive=False))
            else:
                lits.append(GoalLiteral(p))
        if not want:
            if rng.random() < 0.3:
                mutated = _mutate_action(rng, state, actions)
                if mutated is None:
                    return None
                actions = mutated
            else:
                i = rng.randrange(len(lits))
                lits[i] = GoalLiteral(lits[i].prop, not lits[i].positive)
        goal = GoalFormula(tuple(lits))
    return TaskInstance(kind, state, tuple(actions), goal, want, texts)


def _try_gr(rng, state, texts, n_blocks, length, want):
    _, target = _random_walk(rng, state, max(2, length + rng.randint(0, 2)))
    props = _random_props(rng, target, 2, kinds=("on",))
    lits = [GoalLiteral(p) for p in props]
    if rng.random() < 0.4:
        q = _false_prop(rng, target, kinds=("on",))
        lits[0] = GoalLiteral(q, positive=False)
    goal = GoalFormula(tuple(lits))
    plan = bw_optimal_plan(state, goal, rng)
    if not plan or len(plan) < 2:
        return None
    k = min(len(plan), max(1, length))
    if want:
        obs = plan[:k]
    else:
        obs, _ = _random_walk(rng, state, k)
        if obs == plan[:k]:
            return None
    return TaskInstance("goal_recognition", state, tuple(obs), goal, want, texts)
