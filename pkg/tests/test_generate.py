import pytest

from logot.puzzles import (
    BlackMask,
    bw_optimal_plan,
    bw_optimal_plan_length,
    bw_run,
    count_sudoku_solutions,
    generate_instance,
    verify_fillomino,
    verify_hitori,
    verify_sudoku,
)
from logot.puzzles.generate import DEFAULT_PARAMS

SOLVED = [
    [5, 3, 4, 6, 7, 8, 9, 1, 2],
    [6, 7, 2, 1, 9, 5, 3, 4, 8],
    [1, 9, 8, 3, 4, 2, 5, 6, 7],
    [8, 5, 9, 7, 6, 1, 4, 2, 3],
    [4, 2, 6, 8, 5, 3, 7, 9, 1],
    [7, 1, 3, 9, 2, 4, 8, 5, 6],
    [9, 6, 1, 5, 3, 7, 2, 8, 4],
    [2, 8, 7, 4, 1, 9, 6, 3, 5],
    [3, 4, 5, 2, 8, 6, 1, 7, 9],
]


def test_solution_counter():
    assert count_sudoku_solutions(SOLVED) == 1
    holes = [row[:] for row in SOLVED]
    holes[0][0] = 0
    assert count_sudoku_solutions(holes) == 1
    empty = [[0] * 9 for _ in range(9)]
    assert count_sudoku_solutions(empty, limit=3) == 3
    bad = [row[:] for row in SOLVED]
    bad[0][1] = 5
    assert count_sudoku_solutions(bad) == 0


@pytest.mark.parametrize("seed", range(5))
def test_sudoku_instances_are_unique(seed):
    gen = generate_instance("sudoku", None, seed)
    assert count_sudoku_solutions(gen.instance.cells, limit=2) == 1
    assert verify_sudoku(gen.instance, gen.truth).valid


@pytest.mark.parametrize("size", [4, 5, 6, 7, 8])
def test_hitori_truth_verifies(size):
    gen = generate_instance("hitori", {"size": size}, size)
    assert gen.instance.size == size and isinstance(gen.truth, BlackMask)
    assert verify_hitori(gen.instance, gen.truth).valid


@pytest.mark.parametrize("size", [4, 5, 6])
def test_fillomino_truth_verifies(size):
    gen = generate_instance("fillomino", {"size": size}, size)
    assert verify_fillomino(gen.instance, gen.truth).valid
    assert any(v == 0 for row in gen.instance.cells for v in row)


@pytest.mark.parametrize("kind", list(DEFAULT_PARAMS))
def test_generation_is_deterministic(kind):
    params = {"blocks": 4} if kind in ("projection", "legality", "plan_verification", "goal_recognition") else None
    assert generate_instance(kind, params, 17) == generate_instance(kind, params, 17)
    assert generate_instance(kind, params, 17) != generate_instance(kind, params, 18)


def test_forced_labels():
    for label in (True, False):
        for seed in range(5):
            gen = generate_instance("plan_verification", {"blocks": 4, "label": label}, seed)
            assert gen.truth is label


def test_plan_lengths_and_plans():
    for seed in range(10):
        t = generate_instance("goal_recognition", {"blocks": 4}, seed).instance
        plan = bw_optimal_plan(t.state, t.query)
        n = bw_optimal_plan_length(t.state, t.query)
        assert len(plan) == n
        final, bad = bw_run(t.state, plan)
        assert bad is None and t.query.satisfied(final)


def test_unknown_kind():
    with pytest.raises(ValueError):
        generate_instance("chess")
