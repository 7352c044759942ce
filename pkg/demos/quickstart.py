"""Solve one generated puzzle of each grid kind with the reference translator.

    python3 demos/quickstart.py

Walks the whole pipeline: rules and state become an answer set program, the
program is grounded and solved, and the answer set is decoded and checked by
an independent verifier.
"""

from logot.pipeline import TranslatorChoice, program_text, solve_puzzle
from logot.puzzles import generate_instance, verify_grid_answer
from logot.translate import load_bank, puzzle_instance, question_text

for kind, params in (("sudoku", None), ("hitori", {"size": 5}), ("fillomino", {"size": 5})):
    gen = generate_instance(kind, params, seed=1)
    p = puzzle_instance(kind, question_text(gen.instance))
    print(f"== {kind} ==")
    print(p.question, end="")

    answer, trace = solve_puzzle(p, load_bank(kind), TranslatorChoice())
    ground = trace.stage("ground").info
    solved = trace.stage("solve").info
    print(f"-- program: {len(program_text(trace).splitlines())} lines, "
          f"ground: {ground['atoms']} atoms / {ground['rules']} rules, solver: {solved['status']}")
    print(answer.to_text())
    print("verifier:", "valid" if verify_grid_answer(kind, gen.instance, answer.value).valid else "INVALID")
    print()
