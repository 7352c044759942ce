"""Re-run the recorded LLM benchmark offline and show where its answers went wrong.

    python3 demos/replay.py [OUT_DIR]

The fixture file holds one recorded response per prompt.  Replay mode looks
each prompt up by hash, so the run needs no network and no API key.  Costs
come from the configured prices and are exact fractions.
"""

import json
import os
import sys
import tempfile

from logot.bench import BenchConfig, emit_report, run_bench
from logot.translate import format_cost, reference_state_text

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "tests", "fixtures", "replay")

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="logot-replay-")
cfg = BenchConfig.load(os.path.join(FIXTURES, "config.json"))
cfg = BenchConfig(cfg.tasks, cfg.mode, cfg.llm, out=out)
report = run_bench(cfg)

print(emit_report(report, "markdown"))
for rec in report.records:
    mark = "ok   " if rec.correct else "WRONG"
    print(f"{mark} {rec.task} #{rec.index}  cost {format_cost(rec.cost):>7}  answer: {rec.answer!r}")
print(f"\ntotal cost {format_cost(report.total_cost)}; traces under {out}/traces/")

# where the wrong Hitori answer came from: its recorded state translation
# against what the reference translator emits for the same question
with open(os.path.join(out, "traces", "hitori", "0001.json"), encoding="utf-8") as f:
    trace = json.load(f)
recorded = next(s for s in trace["stages"] if s["name"] == "state")["program"].splitlines()
reference = reference_state_text("hitori", trace["question"]).splitlines()
print("\nhitori #1 state translation, recorded vs reference:")
for got, want in zip(recorded, reference):
    if got != want:
        print(f"  recorded {got}   reference {want}")
