import itertools
import random

import pytest

from logot.puzzles import (
    BlackMask,
    Grid,
    GridFormatError,
    generate_instance,
    parse_grid,
    verify_fillomino,
    verify_grid_answer,
    verify_hitori,
    verify_sudoku,
)

SOLVED = [
    "534678912", "672195348", "198342567",
    "859761423", "426853791", "713924856",
    "961537284", "287419635", "345286179",
]


def sudoku(rows):
    return parse_grid("\n".join(rows), "sudoku")


def test_positional_indexing():
    rows = ["0" * 9] * 8 + ["000000059"]
    g = sudoku(rows)
    assert g[9, 8] == 5 and g[9, 9] == 9 and g[9, 7] == 0


@pytest.mark.parametrize("text,kind", [("0", "sudoku"), ("0", "hitori"), ("12 21", "hitori")])
def test_size_bounds(text, kind):
    with pytest.raises(GridFormatError):
        parse_grid(text, kind)


@pytest.mark.parametrize("text", ["123 45 678", "12a 456 789", ""])
def test_malformed_grids(text):
    with pytest.raises(GridFormatError):
        parse_grid(text, "hitori")


def test_spaces_and_newlines_are_both_row_separators():
    assert parse_grid("123 456 789", "hitori") == parse_grid("123\n456\n789\n", "hitori")


def test_verify_sudoku_valid_and_duplicate():
    sol = sudoku(SOLVED)
    assert verify_sudoku(sol, sol).valid
    bad = [SOLVED[0][:1] + "5" + SOLVED[0][2:]] + SOLVED[1:]
    rep = verify_sudoku(sudoku(["0" * 9] * 9), sudoku(bad))
    assert not rep.valid and 1 in {v.rule for v in rep.violations}


def test_verify_sudoku_givens_preserved():
    given = sudoku(["1" + "0" * 8] + ["0" * 9] * 8)
    rep = verify_sudoku(given, sudoku(SOLVED))
    assert not rep.valid and [v.rule for v in rep.violations] == [0]


def test_verify_sudoku_preconditions_raise():
    with pytest.raises(ValueError):
        verify_sudoku(sudoku(SOLVED), sudoku(["0" * 9] * 9))


def test_verify_hitori_rules():
    g = parse_grid("112 231 323", "hitori")
    rep = verify_hitori(g, BlackMask.empty(3))
    assert not rep.valid and 1 in {v.rule for v in rep.violations}
    rep = verify_hitori(parse_grid("123 231 312", "hitori"), BlackMask.from_cells(3, [(1, 1), (2, 1)]))
    assert 2 in {v.rule for v in rep.violations}
    assert verify_hitori(g, BlackMask.from_cells(3, [(1, 1), (3, 1)])).valid
    assert verify_hitori(parse_grid("123 231 312", "hitori"), BlackMask.empty(3)).valid


def _direct_hitori(grid, black):
    n = grid.size
    white = [(r, c) for r in range(1, n + 1) for c in range(1, n + 1) if (r, c) not in black]
    for r in range(1, n + 1):
        vals = [grid[r, c] for c in range(1, n + 1) if (r, c) not in black]
        if len(vals) != len(set(vals)):
            return False
    for c in range(1, n + 1):
        vals = [grid[r, c] for r in range(1, n + 1) if (r, c) not in black]
        if len(vals) != len(set(vals)):
            return False
    for r, c in black:
        if (r + 1, c) in black or (r, c + 1) in black:
            return False
    if not white:
        return True
    seen = {white[0]}
    todo = [white[0]]
    ws = set(white)
    while todo:
        r, c = todo.pop()
        for nb in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
            if nb in ws and nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return len(seen) == len(ws)


@pytest.mark.parametrize("seed", range(3))
def test_hitori_verifier_matches_direct_rules_on_all_4x4_masks(seed):
    rng = random.Random(seed)
    g = Grid.from_rows([[rng.randint(1, 4) for _ in range(4)] for _ in range(4)], "hitori")
    cells = [(r, c) for r in range(1, 5) for c in range(1, 5)]
    for bits in range(1 << 16):
        black = {cells[i] for i in range(16) if bits >> i & 1}
        assert verify_hitori(g, BlackMask.from_cells(4, black)).valid == _direct_hitori(g, black)


def test_verify_fillomino():
    empty = parse_grid("000 000 000", "fillomino")
    ones = Grid.from_rows([[1] * 3] * 3, "fillomino")
    assert not verify_fillomino(empty, ones).valid
    # "21 21": the two 1-cells touch and form a 2-cell region of 1s
    g = Grid(2, ((2, 1), (2, 1)), "fillomino")
    rep = verify_fillomino(Grid(2, ((0, 0), (0, 0)), "fillomino"), g)
    assert not rep.valid
    # two 3-regions separated by a 2-region and a 1
    good = parse_grid("333 221 333", "fillomino")
    assert verify_fillomino(empty, good).valid
    # the 4s only cover two cells
    assert not verify_fillomino(empty, parse_grid("122 333 144", "fillomino")).valid


def test_verify_fillomino_givens():
    good = parse_grid("333 221 333", "fillomino")
    assert verify_fillomino(parse_grid("300 001 000", "fillomino"), good).valid
    rep = verify_fillomino(parse_grid("200 000 000", "fillomino"), good)
    assert [v.rule for v in rep.violations] == [0]


@pytest.mark.parametrize("kind", ["sudoku", "hitori", "fillomino"])
@pytest.mark.parametrize("seed", range(3))
def test_generated_instances_verify(kind, seed):
    gen = generate_instance(kind, None, seed)
    if kind == "hitori":
        assert verify_hitori(gen.instance, gen.truth).valid
    else:
        assert verify_grid_answer(kind, gen.instance, gen.truth).valid


def test_generation_is_deterministic():
    a = generate_instance("sudoku", {"density": 0.35}, 7)
    b = generate_instance("sudoku", {"density": 0.35}, 7)
    assert a == b
