"""The four Blocks World tasks on their worked examples.

    python3 demos/blocks_world.py

For each task the instance is translated to facts, joined with the action
theory and solved.  The label comes from the solver; the simulator oracle
gives the expected label.  Goal recognition shows its horizon search.
"""

import os

from logot.pipeline import TranslatorChoice, solve_puzzle
from logot.puzzles import bw_oracle_label, parse_task
from logot.translate import load_bank, puzzle_instance, question_text, reference_state_text

GOLDEN = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures", "golden")

for kind in ("legality", "projection", "plan_verification", "goal_recognition"):
    with open(os.path.join(GOLDEN, f"{kind}.txt"), encoding="utf-8") as f:
        task = parse_task(f.read(), kind)
    p = puzzle_instance(kind, question_text(task))
    print(f"== {kind} ==")
    print(reference_state_text(kind, p.question), end="")

    answer, trace = solve_puzzle(p, load_bank(kind), TranslatorChoice())
    for st in trace.stages:
        if st.name.startswith("solve"):
            print(f"  {st.name:16s} {st.info['status']}")
    print(f"label: {answer.label}   oracle: {bw_oracle_label(task)}")
    print()
