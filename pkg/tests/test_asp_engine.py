import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logot.asp import (
    OPTIMUM,
    SAT,
    TIMEOUT,
    UNSAT,
    SolveOptions,
    TooManyAtomsError,
    UnboundConstantError,
    UnsafeRuleError,
    UnsupportedProgramError,
    brute_force_models,
    check_stable,
    ground,
    parse_program,
    solve,
)
from logot.asp.check import model_cost
from logot.asp.ground import GroundingError
from logot.asp.testing import random_ground_program

ALL = SolveOptions(max_models=None, optimize=False)


def gp(text, **consts):
    return ground(parse_program(text), consts=consts or None)


def models(text, opts=ALL):
    res = solve(gp(text), opts)
    return {frozenset(m.symbols) for m in res.models}


def ids(g, *symbols):
    return frozenset(g.id_of(s) for s in symbols)


# --- grounding -------------------------------------------------------------


def test_interval_expansion():
    g = gp("num(1..3).")
    assert sorted(g.symbol(a) for a in g.facts()) == ["num(1)", "num(2)", "num(3)"]


def test_arithmetic_folding():
    assert models("num(1..3). p(X+1) :- num(X).") == {
        frozenset({"num(1)", "num(2)", "num(3)", "p(2)", "p(3)", "p(4)"})
    }


def test_unsafe_rule_names_the_variable():
    with pytest.raises(UnsafeRuleError) as e:
        gp("p(X) :- not q(X).")
    assert "X" in str(e.value)


def test_unbound_constant():
    with pytest.raises(UnboundConstantError):
        gp("board_size(n). coord(1..n).")
    g = gp("coord(1..n).", n=2)
    assert g.num_atoms == 2


def test_consts_argument_overrides_program_value():
    g = gp("#const k=5. s(0..k).", k=1)
    assert sorted(g.symbol(a) for a in g.facts()) == ["s(0)", "s(1)"]


def test_ground_size_cap():
    with pytest.raises(GroundingError):
        ground(parse_program("n(1..30). t(X, Y, Z) :- n(X), n(Y), n(Z)."), limit=1000)


def test_classical_negation_pairs_get_consistency_constraint():
    res = solve(gp("a. -a."), ALL)
    assert res.status == UNSAT
    g = gp("{a}. {-a}.")
    assert len(g.neg_pairs) == 1
    assert {frozenset(m.symbols) for m in solve(g, ALL).models} == {frozenset(), frozenset({"a"}), frozenset({"-a"})}


def test_grounding_only_keeps_derivable_atoms():
    g = gp("p(1). q(X) :- p(X), not r(X). r(2) :- p(2).")
    names = {g.symbol(i) for i in range(g.num_atoms)}
    assert "r(1)" not in names and "q(2)" not in names


# --- solving ---------------------------------------------------------------


def test_empty_program_has_the_empty_model():
    res = solve(gp(""), ALL)
    assert res.status == SAT and [m.atoms for m in res.models] == [frozenset()]


def test_self_support_is_unfounded():
    assert models("a :- a.") == {frozenset()}


def test_even_loop_has_two_models():
    assert models("a :- not b. b :- not a.") == {frozenset({"a"}), frozenset({"b"})}


def test_minimize_finds_optimum():
    res = solve(gp("{a}. {b}. :- not a, not b. #minimize{1,a:a; 1,b:b}."), SolveOptions())
    assert res.status == OPTIMUM and res.cost == 1


def test_optimum_enumeration_returns_all_optimal_models():
    res = solve(gp("{a}. {b}. :- not a, not b. #minimize{1,a:a; 1,b:b}."), SolveOptions(max_models=None))
    assert {frozenset(m.symbols) for m in res.models} == {frozenset({"a"}), frozenset({"b"})}
    assert all(m.cost == 1 for m in res.models)


def test_bounded_choice():
    got = models("1 { a; b; c } 2.")
    assert got == {frozenset(s) for s in (["a"], ["b"], ["c"], ["a", "b"], ["a", "c"], ["b", "c"])}


def test_conditional_choice_exactly_one():
    got = models("num(1..3). 1 { pos(N) : num(N) } 1.")
    assert len(got) == 3 and all(sum(s.startswith("pos") for s in m) == 1 for m in got)


def test_disjunction_is_minimal():
    assert models("a ; b.") == {frozenset({"a"}), frozenset({"b"})}


def test_positive_loop_needs_external_support():
    text = "a :- b. b :- a. a :- not c. c :- not a."
    assert models(text) == {frozenset({"a", "b"}), frozenset({"c"})}


def test_head_cycle_is_rejected():
    with pytest.raises(UnsupportedProgramError):
        solve(gp("a ; b. a :- b. b :- a."), ALL)


def test_timeout_status():
    # pigeonhole 9 into 8 holes is hard enough to hit a tiny timeout
    text = "p(1..9). h(1..8). 1 { in(P, H) : h(H) } 1 :- p(P). :- in(P1, H), in(P2, H), P1 < P2."
    res = solve(gp(text), SolveOptions(timeout=0.05))
    assert res.status in (TIMEOUT, UNSAT)


def test_statistics_fields():
    res = solve(gp("a :- not b. b :- not a."), ALL)
    assert {"decisions", "conflicts", "ground_rules", "wall_time"} <= set(res.statistics)


def test_determinism_of_model_order():
    text = "{ a; b; c; d }. :- a, b."
    runs = [[m.symbols for m in solve(gp(text), ALL).models] for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]
    seeded = [[m.symbols for m in solve(gp(text), SolveOptions(max_models=None, decision_order=7)).models] for _ in range(2)]
    assert seeded[0] == seeded[1]
    assert {frozenset(s) for s in seeded[0]} == {frozenset(s) for s in runs[0]}


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(timeout=0)
    with pytest.raises(ValueError):
        SolveOptions(max_models=-1)


# --- oracle ------------------------------------------------------------------


def test_brute_force_small_cases():
    assert brute_force_models(gp("")) == {frozenset()}
    g = gp("a. b :- a.")
    assert brute_force_models(g) == {ids(g, "a", "b")}


def test_brute_force_guard():
    with pytest.raises(TooManyAtomsError):
        brute_force_models(gp("{ p(1..23) }."))


def test_check_stable_cases():
    from logot.asp import GroundProgram, GroundRule

    g = gp("a.")
    assert check_stable(g, ids(g, "a"))
    # a :- a.  with {a}: a model, but not founded
    g = GroundProgram([("a", ())], [GroundRule("rule", (0,), (0,), ())])
    assert not check_stable(g, {0})
    assert check_stable(g, set())
    # a :- not b.  with {}: the reduct keeps "a." which {} violates
    g = GroundProgram([("a", ()), ("b", ())], [GroundRule("rule", (0,), (), (1,))])
    assert not check_stable(g, set())
    assert check_stable(g, {0})
    assert not check_stable(g, {0, 1})


def _symbols(g, ms):
    return {frozenset(g.symbol(i) for i in m) for m in ms}


@pytest.mark.parametrize("seed", range(40))
def test_solver_matches_brute_force_on_random_programs(seed):
    g = random_ground_program(random.Random(seed))
    got = solve(g, ALL)
    assert {m.atoms for m in got.models} == brute_force_models(g)
    assert all(check_stable(g, m.atoms) for m in got.models)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_optimization_is_sound(seed):
    g = random_ground_program(random.Random(seed), max_atoms=10, max_rules=14)
    if not g.minimize:
        return
    res = solve(g, SolveOptions(max_models=None))
    truth = brute_force_models(g)
    if not truth:
        assert res.status == UNSAT
        return
    best = min(model_cost(g, m) for m in truth)
    assert res.status == OPTIMUM and res.cost == best
    assert {m.atoms for m in res.models} == {m for m in truth if model_cost(g, m) == best}


def test_grounding_is_conservative():
    text = "n(1..4). { s(X) } :- n(X). t(X) :- s(X), not u(X). u(X) :- n(X), X > 2. :- t(1), t(2)."
    g = gp(text)
    for m in solve(g, ALL).models:
        assert m.atoms <= set(range(g.num_atoms))
