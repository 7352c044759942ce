import json
import os

import pytest

from conftest import fixture_path
from logot.asp import AnswerSet, SolveOptions, ground, parse_program, solve
from logot.pipeline import (
    AnswerInstance,
    DecodeError,
    RuleCache,
    TranslatorChoice,
    decode_answer,
    gr_horizon_bound,
    program_text,
    solve_puzzle,
    translate_puzzle,
)
from logot.puzzles import (
    bw_oracle_label,
    generate_instance,
    parse_task,
    verify_fillomino,
    verify_hitori,
    verify_sudoku,
)
from logot.translate import LlmConfig, load_bank, prompt_hash, puzzle_instance, question_text, reference_state_text
from logot.translate.prompts import build_rule_prompt, build_state_prompt

REPLAY = fixture_path("replay")
REF = TranslatorChoice()


def golden_instance(kind):
    with open(fixture_path("golden", f"{kind}.txt"), encoding="utf-8") as f:
        t = parse_task(f.read(), kind)
    return puzzle_instance(kind, question_text(t))


def instance(kind, params=None, seed=0):
    gen = generate_instance(kind, params, seed)
    return gen, puzzle_instance(kind, question_text(gen.instance))


def answer_set(*symbols):
    return AnswerSet(frozenset(range(len(symbols))), None, tuple(symbols))


@pytest.mark.parametrize(
    "kind,label",
    [("legality", False), ("projection", False), ("plan_verification", True), ("goal_recognition", False)],
)
def test_golden_labels(kind, label):
    answer, trace = solve_puzzle(golden_instance(kind), load_bank(kind), REF)
    assert trace.ok and answer.label is label
    assert trace.answer == str(label)


def test_sudoku_reference_passes_verifier():
    gen, p = instance("sudoku", seed=4)
    answer, trace = solve_puzzle(p, load_bank("sudoku"), REF)
    assert verify_sudoku(gen.instance, answer.grid).valid
    assert answer.grid == gen.truth


@pytest.mark.parametrize("kind", ["hitori", "fillomino"])
def test_grid_reference_passes_verifier(kind):
    for seed in range(3):
        gen, p = instance(kind, {"size": 5}, seed)
        answer, _ = solve_puzzle(p, load_bank(kind), REF)
        check = verify_hitori if kind == "hitori" else verify_fillomino
        target = answer.mask if kind == "hitori" else answer.grid
        assert check(gen.instance, target).valid


def test_decode_examples():
    _, sp = instance("sudoku", seed=0)
    full = [f"pos({r}, {c}, {1 + (r * 3 + r // 3 + c - 4) % 9})" for r in range(1, 10) for c in range(1, 10)]
    full[0] = "pos(1, 1, 5)"
    a = decode_answer("sudoku", answer_set(*full), sp)
    assert a.grid[1, 1] == 5
    _, hp = instance("hitori", {"size": 4}, 0)
    m = decode_answer("hitori", answer_set("black(2, 3)", "coord(1, 1)"), hp)
    assert m.mask[2, 3] and sum(map(sum, m.mask.cells)) == 1
    with pytest.raises(DecodeError):
        decode_answer("sudoku", answer_set(*full, "pos(1, 1, 4)"), sp)
    with pytest.raises(DecodeError):
        decode_answer("sudoku", answer_set(*full[1:]), sp)
    with pytest.raises(DecodeError):
        decode_answer("hitori", answer_set("black(5, 1)"), hp)
    with pytest.raises(ValueError):
        decode_answer("hitori", answer_set(), sp)


def test_decode_is_inverse_of_fact_emission():
    for kind in ("sudoku", "fillomino"):
        gen, p = instance(kind, None, 2)
        facts = reference_state_text(kind, question_text(gen.truth))
        g = ground(parse_program(facts))
        m = AnswerSet(frozenset(g.facts()), None, tuple(g.symbol(a) for a in g.facts()))
        assert decode_answer(kind, m, p).grid == gen.truth


def test_grid_without_answer_set_is_no_solution():
    rows = ["110000000"] + ["0" * 9] * 8
    p = puzzle_instance("sudoku", "\n".join(rows) + "\n")
    answer, trace = solve_puzzle(p, load_bank("sudoku"), REF)
    assert trace.ok and not answer.solved and answer.to_text() == "no solution"
    assert trace.stage("solve").info["status"] == "UNSAT"


def test_trace_stage_order_and_usage():
    _, p = instance("hitori", {"size": 4}, 1)
    answer, trace = solve_puzzle(p, load_bank("hitori"), REF)
    names = [s.name for s in trace.stages]
    assert names == ["rule 1", "rule 2", "rule 3", "rule 4", "state", "union", "ground", "solve", "decode"]
    assert trace.usage.cost == sum(s.usage.cost for s in trace.stages)
    assert trace.stage("ground").info["atoms"] > 0
    text = program_text(trace)
    assert "pos(1, 1," in text and parse_program(text)
    d = json.loads(trace.to_json())
    assert "wall_ms" not in d and all("wall_ms" not in s for s in d["stages"])


def test_trace_timing_is_opt_in():
    _, p = instance("legality", {"blocks": 3}, 0)
    _, trace = solve_puzzle(p, load_bank("legality"), REF, timing=True)
    d = json.loads(trace.to_json())
    assert "wall_ms" in d and all("wall_ms" in s for s in d["stages"])


def test_goal_recognition_stages():
    p = golden_instance("goal_recognition")
    answer, trace = solve_puzzle(p, load_bank("goal_recognition"), REF)
    names = [s.name for s in trace.stages]
    solves = [n for n in names if n.startswith("solve h=")]
    k = int(solves[0].split("=")[1])
    assert k == len(parse_task(p.question, "goal_recognition").actions)
    assert names[-1] == "decode"
    statuses = [trace.stage(n).info["status"] for n in solves]
    assert statuses[:-1] == ["UNSAT"] * (len(solves) - 1)
    assert any(n.startswith("solve free") for n in names)


def test_gr_bound():
    text = "block(a). block(b). block(c). occurs(move(a, b, table), 0)."
    assert gr_horizon_bound(parse_program(text)) == (1, 6)


def test_legality_unsat_iff_oracle_false():
    bank = load_bank("legality")
    seen = set()
    for seed in range(40):
        gen, p = instance("legality", {"blocks": 4}, seed)
        answer, trace = solve_puzzle(p, bank, REF)
        unsat = trace.stage("solve").info["status"] == "UNSAT"
        assert unsat == (not bw_oracle_label(gen.instance))
        seen.add(unsat)
    assert seen == {True, False}


@pytest.mark.parametrize("kind", ["projection", "plan_verification", "goal_recognition"])
def test_bw_labels_match_oracle(kind):
    bank = load_bank(kind)
    for seed in range(8):
        gen, p = instance(kind, {"blocks": 4}, seed)
        answer, _ = solve_puzzle(p, bank, REF)
        assert answer.label == bw_oracle_label(gen.instance) == gen.truth


def test_bank_must_match_kind():
    _, p = instance("hitori", {"size": 4}, 0)
    with pytest.raises(ValueError):
        solve_puzzle(p, load_bank("sudoku"), REF)


def test_translator_choice():
    assert REF.mode == "reference"
    with pytest.raises(ValueError):
        TranslatorChoice(rules="llm")
    cfg = LlmConfig(mode="replay", fixtures="x.jsonl")
    assert TranslatorChoice.with_llm(cfg).mode == "llm"
    assert TranslatorChoice("llm", "reference", cfg).mode == "hybrid"


def _replay_cfg():
    return LlmConfig(model="gpt-4o", mode="replay", fixtures=os.path.join(REPLAY, "responses.jsonl"),
                     price_in="0.005", price_out="0.015")


def test_replay_reproduces_shipped_trace():
    tc = TranslatorChoice.with_llm(_replay_cfg())
    for kind in ("hitori", "legality"):
        params = {"size": 4} if kind == "hitori" else {"blocks": 3, "plan_length": 3}
        _, p = instance(kind, params, 0)
        _, trace = solve_puzzle(p, load_bank(kind), tc, SolveOptions(max_models=2), RuleCache())
        with open(os.path.join(REPLAY, "expected", "traces", kind, "0000.json"), encoding="utf-8") as f:
            assert trace.to_json() == f.read()


def test_replay_same_answer_twice():
    tc = TranslatorChoice.with_llm(_replay_cfg())
    _, p = instance("hitori", {"size": 4}, 1)
    a1, t1 = solve_puzzle(p, load_bank("hitori"), tc)
    a2, t2 = solve_puzzle(p, load_bank("hitori"), tc)
    assert a1 == a2 and t1.to_json() == t2.to_json()
    assert t1.stage("rule 1").prompt is not None and t1.stage("rule 1").raw is not None


def test_rule_cache_charges_once():
    tc = TranslatorChoice.with_llm(_replay_cfg())
    cache = RuleCache()
    bank = load_bank("hitori")
    _, p0 = instance("hitori", {"size": 4}, 0)
    _, p1 = instance("hitori", {"size": 4}, 1)
    _, t0 = solve_puzzle(p0, bank, tc, cache=cache)
    _, t1 = solve_puzzle(p1, bank, tc, cache=cache)
    assert len(cache) == 1
    assert not t0.stage("rule 1").cached and t1.stage("rule 1").cached
    assert t1.stage("rule 1").usage.cost == 0 and t0.stage("rule 1").usage.cost > 0
    assert t1.stage("rule 1").program == t0.stage("rule 1").program


def _fixture(path, prompt, response):
    with open(path, "a", encoding="utf-8") as f:
        f.write(json.dumps({"hash": prompt_hash(prompt), "model": "gpt-4o", "response": response,
                            "input_tokens": 1, "output_tokens": 1}) + "\n")


def test_failed_rule_translation_is_attributed(tmp_path):
    path = str(tmp_path / "fx.jsonl")
    bank = load_bank("hitori")
    _, p = instance("hitori", {"size": 4}, 0)
    _fixture(path, build_rule_prompt(bank, p, 1), "Sorry, I cannot help with that.")
    tc = TranslatorChoice("llm", "reference", LlmConfig(mode="replay", fixtures=path))
    cache = RuleCache()
    answer, trace = solve_puzzle(p, bank, tc, cache=cache)
    assert answer is None and trace.error_stage == "rule 1" and not trace.ok
    assert "ExtractionError" in trace.stage("rule 1").error
    assert trace.stage("rule 1").raw == "Sorry, I cannot help with that."
    # the failure is cached: a second instance fails the same way without another charge
    _, p1 = instance("hitori", {"size": 4}, 1)
    answer, trace = solve_puzzle(p1, bank, tc, cache=cache)
    assert trace.error_stage == "rule 1" and trace.stage("rule 1").cached and trace.usage.cost == 0


def test_fixture_miss_is_attributed_to_state(tmp_path):
    path = str(tmp_path / "fx.jsonl")
    bank = load_bank("legality")
    _, p = instance("legality", {"blocks": 3}, 0)
    tc = TranslatorChoice("reference", "llm", LlmConfig(mode="replay", fixtures=path))
    open(path, "w").close()
    answer, trace = solve_puzzle(p, bank, tc)
    assert trace.error_stage == "state" and "FixtureMissError" in trace.stage("state").error
    assert trace.stage("state").prompt == build_state_prompt(bank, p)


def test_bad_state_program_fails_at_ground(tmp_path):
    path = str(tmp_path / "fx.jsonl")
    bank = load_bank("hitori")
    _, p = instance("hitori", {"size": 4}, 0)
    _fixture(path, build_state_prompt(bank, p), "p(X) :- q.")
    tc = TranslatorChoice("reference", "llm", LlmConfig(mode="replay", fixtures=path))
    answer, trace = solve_puzzle(p, bank, tc)
    assert answer is None and trace.error_stage == "ground"


def test_translate_puzzle_only():
    _, p = instance("sudoku", None, 0)
    program, trace = translate_puzzle(p, load_bank("sudoku"), REF)
    assert [s.name for s in trace.stages][-1] == "union"
    assert solve(ground(program)).satisfiable


def test_answer_instance_text():
    assert AnswerInstance("legality", label=True).to_text() == "True"
    assert AnswerInstance("sudoku").to_text() == "no solution"
