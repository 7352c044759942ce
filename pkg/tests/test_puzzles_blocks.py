import itertools
import random

import pytest

from conftest import fixture_path
from logot.puzzles import (
    TABLE,
    BWAction,
    BWParseError,
    BWState,
    BWStateError,
    GoalFormula,
    GoalLiteral,
    IllegalMove,
    Prop,
    bw_apply,
    bw_optimal_plan_length,
    bw_oracle_label,
    bw_run,
    format_task,
    generate_instance,
    parse_bw_actions,
    parse_bw_goal,
    parse_bw_state,
    parse_task,
)

FIGURE_STATE = (
    "The lime block is on top of the aquamarine block. The olive block is clear. The lime block "
    "is clear. The teal block is on the table. The olive block is on the table. The navy block "
    "is on top of the teal block. The navy block is clear. The aquamarine block is on the table."
)


def on(b, loc, positive=True):
    return GoalLiteral(Prop("on", b, loc), positive)


def golden(kind):
    with open(fixture_path("golden", f"{kind}.txt"), encoding="utf-8") as f:
        return parse_task(f.read(), kind)


def test_parse_figure_state():
    s = parse_bw_state(FIGURE_STATE)
    assert s.on == {"lime": "aquamarine", "navy": "teal", "teal": TABLE, "olive": TABLE, "aquamarine": TABLE}
    assert s.clear == {"olive", "lime", "navy"}


def test_cycle_and_contradictions():
    with pytest.raises((BWStateError, BWParseError)):
        parse_bw_state("The a block is on top of the b block. The b block is on top of the a block.")
    with pytest.raises((BWStateError, BWParseError)):
        parse_bw_state("The a block is on the table. The a block is on top of the b block. The b block is on the table.")
    with pytest.raises((BWStateError, BWParseError)):
        parse_bw_state("The a block is on the table. The b block is on top of the a block. The a block is clear.")


def test_empty_state():
    assert parse_bw_state("").blocks == frozenset()


def test_unparseable_sentence_is_reported_verbatim():
    with pytest.raises(BWParseError) as e:
        parse_bw_state("The a block is on the table. The a block is floating.")
    assert "floating" in str(e.value)


def test_parse_actions():
    assert parse_bw_actions("Jane moves the navy block from the teal block to the lime block.") == [
        BWAction("navy", "teal", "lime")
    ]
    assert parse_bw_actions("Jane moves the turquoise block from the brown block onto the table.") == [
        BWAction("turquoise", "brown", TABLE)
    ]
    assert parse_bw_actions("") == []
    with pytest.raises(BWParseError):
        parse_bw_actions("Jane throws the a block.")


def test_parse_goals():
    pv = parse_bw_goal("The silver block is not on the table and the red block is on the table.")
    assert pv.literals == (on("silver", TABLE, False), on("red", TABLE))
    gr = parse_bw_goal("The brown block is not on the table and the olive block is on top of the magenta block.")
    assert gr.literals == (on("brown", TABLE, False), on("olive", "magenta"))
    assert parse_bw_goal("The a block is on the table.").literals == (on("a", TABLE),)
    pj = parse_bw_goal("The teal block is on top of the brown block. The green block is clear.")
    assert len(pj.literals) == 2


def test_goal_on_itself_rejected():
    with pytest.raises(ValueError):
        Prop("on", "a", "a")


def test_apply_legality_example_first_action_fails():
    t = golden("legality")
    res = bw_apply(t.state, BWAction("green", "blue", TABLE))
    assert isinstance(res, IllegalMove) and not res
    assert "green" in res.reason


def test_apply_success():
    s = parse_bw_state(FIGURE_STATE)
    s2 = bw_apply(s, BWAction("navy", "teal", "lime"))
    assert isinstance(s2, BWState)
    assert s2.on["navy"] == "lime" and "teal" in s2.clear and "lime" not in s2.clear


def test_action_invariants():
    with pytest.raises(ValueError):
        BWAction("b", TABLE, "b")
    with pytest.raises(ValueError):
        BWAction("b", "c", "c")


def test_apply_then_inverse_restores_state():
    rng = random.Random(3)
    for _ in range(200):
        gen = generate_instance("legality", {"blocks": 4}, rng.randrange(10**6))
        s = gen.instance.state
        blocks = sorted(s.blocks)
        b = rng.choice(blocks)
        dest = rng.choice([TABLE] + [x for x in blocks if x != b])
        src = s.on[b]
        if dest == src:
            continue
        s2 = bw_apply(s, BWAction(b, src, dest))
        if not s2:
            continue
        back = bw_apply(s2, BWAction(b, dest, src))
        if back:
            assert back == s


def test_optimal_plan_lengths():
    s = BWState.from_dict({"a": TABLE, "b": TABLE})
    assert bw_optimal_plan_length(s, GoalFormula((on("a", TABLE),))) == 0
    assert bw_optimal_plan_length(s, GoalFormula((on("a", "b"),))) == 1
    # unsatisfiable conjunction
    assert bw_optimal_plan_length(s, GoalFormula((on("a", "b"), on("b", "a")))) is None


def test_optimal_plan_guard():
    s = BWState.from_dict({f"b{i}": TABLE for i in range(8)})
    with pytest.raises(ValueError):
        bw_optimal_plan_length(s, GoalFormula((on("b0", "b1"),)))


def _iddfs(state, goal, limit=8):
    blocks = sorted(state.blocks)

    def moves(s):
        for b in blocks:
            if b not in s.clear:
                continue
            for d in [TABLE] + blocks:
                if d == b or d == s.on[b] or (d != TABLE and d not in s.clear):
                    continue
                yield bw_apply(s, BWAction(b, s.on[b], d))

    def dfs(s, depth):
        if goal.satisfied(s):
            return True
        if depth == 0:
            return False
        return any(dfs(n, depth - 1) for n in moves(s))

    for d in range(limit + 1):
        if dfs(state, d):
            return d
    return None


def test_bfs_matches_iterative_deepening():
    rng = random.Random(11)
    for _ in range(25):
        gen = generate_instance("goal_recognition", {"blocks": rng.choice([2, 3, 4])}, rng.randrange(10**6))
        t = gen.instance
        assert bw_optimal_plan_length(t.state, t.query) == _iddfs(t.state, t.query)


@pytest.mark.parametrize(
    "kind,label",
    [("legality", False), ("projection", False), ("plan_verification", True), ("goal_recognition", False)],
)
def test_oracle_on_worked_examples(kind, label):
    t = golden(kind)
    assert t.label is label
    assert bw_oracle_label(t) is label


def test_projection_with_illegal_actions_is_false():
    t = golden("projection")
    s = t.state
    bad = type(t)("projection", s, (BWAction("teal", "brown", TABLE),), t.query)
    assert bw_oracle_label(bad) is False


def test_task_file_round_trip():
    for kind in ("legality", "projection", "plan_verification", "goal_recognition"):
        t = golden(kind)
        again = parse_task(format_task(t), kind)
        assert again == t


def test_generated_labels_match_oracle():
    for kind in ("legality", "projection", "plan_verification", "goal_recognition"):
        labels = []
        for seed in range(60 if kind != "goal_recognition" else 20):
            gen = generate_instance(kind, {"blocks": 4}, seed)
            assert bw_oracle_label(gen.instance) == gen.truth
            labels.append(gen.truth)
        assert any(labels) and not all(labels), kind


def test_run_reports_first_illegal_action():
    t = golden("legality")
    final, bad = bw_run(t.state, t.actions)
    assert (final, bad) == (None, 0)
    pv = golden("plan_verification")
    final, bad = bw_run(pv.state, pv.actions)
    assert bad is None and pv.query.satisfied(final)
