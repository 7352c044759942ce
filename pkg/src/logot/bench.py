"""Benchmark harness: generate instances, run the pipeline, score, and tabulate.

A run directory has this layout:

    <out>/report.csv              task,n,correct,accuracy,cost,mean_ms
    <out>/report.md               accuracy table (one column per task) and cost table
    <out>/results.json            per-instance records, reloadable by ``logot report``
    <out>/traces/<task>/<i>.json  one Trace per instance (i zero-padded to 4 digits)
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .asp import SolveOptions
from .pipeline import RuleCache, TranslatorChoice, solve_puzzle
from .puzzles import PUZZLE_KINDS, TASK_KINDS, bw_oracle_label, generate_instance, verify_grid_answer
from .translate import LlmConfig, format_cost, load_bank, puzzle_instance, question_text
from .translate.llm import API_KEY_ENV

__all__ = [
    "BENCH_MODES",
    "CSV_HEADER",
    "TASK_LABELS",
    "ConfigError",
    "TaskSpec",
    "BenchConfig",
    "InstanceRecord",
    "TaskRow",
    "BenchReport",
    "run_bench",
    "read_config",
    "llm_config_from_dict",
    "DEFAULT_PARAMS",
    "score_answer",
    "emit_report",
    "write_run",
]

log = logging.getLogger(__name__)

BENCH_MODES = ("reference", "llm", "replay")
CSV_HEADER = ("task", "n", "correct", "accuracy", "cost", "mean_ms")
DEFAULT_COUNT = 200
QUICK_COUNT = 20
# column headings of the accuracy table, in column order
TASK_LABELS = {
    "sudoku": "Sudoku",
    "hitori": "Hitori",
    "fillomino": "Fillomino",
    "goal_recognition": "BW-GR",
    "legality": "BW-LG",
    "plan_verification": "BW-PV",
    "projection": "BW-PJ",
}
DEFAULT_PARAMS = {
    "hitori": {"size": [4, 5, 6, 7, 8]},
    "fillomino": {"size": [4, 5, 6]},
    **{k: {"blocks": [3, 4, 5, 6], "plan_length": 3} for k in TASK_KINDS},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TaskSpec:
    """``n`` instances with seeds ``seed .. seed+n-1``.  List-valued params cycle by instance index."""

    kind: str
    n: int = DEFAULT_COUNT
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PUZZLE_KINDS:
            raise ConfigError(f"unknown task {self.kind!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"{self.kind}: count must be at least 1")

    def params_for(self, i: int) -> dict:
        return {k: (v[i % len(v)] if isinstance(v, list) else v) for k, v in self.params.items()}

    def to_dict(self) -> dict:
        return {"n": self.n, "seed": self.seed, "params": self.params}


def read_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return data


def llm_config_from_dict(d: dict, base_dir: str = ".") -> Optional[LlmConfig]:
    """The ``llm`` section of a config, with ``prices`` applied; None when absent."""
    llm = d.get("llm")
    if llm is None:
        return None
    llm = dict(llm)
    prices = d.get("prices")
    if prices is not None:
        bad = set(prices) - {"input", "output"}
        if bad:
            raise ConfigError(f"prices: unknown keys {sorted(bad)}")
        llm["price_in"] = prices.get("input", 0)
        llm["price_out"] = prices.get("output", 0)
    if llm.get("fixtures") and not os.path.isabs(llm["fixtures"]):
        llm["fixtures"] = os.path.join(base_dir, llm["fixtures"])
    try:
        return LlmConfig.from_dict(llm)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"llm: {e}") from None


@dataclass(frozen=True)
class BenchConfig:
    tasks: tuple  # TaskSpec, in report order
    mode: str = "reference"
    llm: Optional[LlmConfig] = None
    parallelism: int = 1
    out: Optional[str] = None
    timing: bool = False
    solve_timeout: float = 60.0
    max_models: int = 2  # 2 lets the trace report whether the first answer was unique

    def __post_init__(self):
        if self.mode not in BENCH_MODES:
            raise ConfigError(f"mode must be one of {BENCH_MODES}, got {self.mode!r}")
        if not self.tasks:
            raise ConfigError("no tasks configured")
        kinds = [t.kind for t in self.tasks]
        if len(set(kinds)) != len(kinds):
            raise ConfigError("a task is listed twice")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be at least 1")
        if self.mode != "reference":
            if self.llm is None:
                raise ConfigError(f"{self.mode} mode needs an llm section")
            if self.mode == "replay" and self.llm.mode != "replay":
                raise ConfigError("replay mode needs llm.mode = replay")
            if self.mode == "llm" and self.llm.mode == "replay":
                raise ConfigError("llm mode needs llm.mode = live or record")

    @classmethod
    def default(cls, quick: bool = False, **kw) -> "BenchConfig":
        n = QUICK_COUNT if quick else DEFAULT_COUNT
        tasks = tuple(TaskSpec(k, n, 0, DEFAULT_PARAMS.get(k, {})) for k in TASK_LABELS)
        return cls(tasks, **kw)

    @classmethod
    def from_dict(cls, d: dict, base_dir: str = ".") -> "BenchConfig":
        """Read the JSON config: ``{"tasks": {kind: {n, seed, params}}, "mode", "llm", "prices", ...}``.

        ``prices`` (``{"input": ..., "output": ...}`` per 1k tokens) overrides
        the prices inside ``llm``.  A relative fixture path is resolved against
        ``base_dir``.
        """
        d = dict(d)
        known = {"tasks", "mode", "llm", "prices", "parallelism", "out", "timing", "solve_timeout", "max_models"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        raw_tasks = d.pop("tasks", None)
        if not isinstance(raw_tasks, dict) or not raw_tasks:
            raise ConfigError("config needs a non-empty 'tasks' object")
        tasks = []
        for kind, spec in raw_tasks.items():
            spec = dict(spec or {})
            bad = set(spec) - {"n", "seed", "params"}
            if bad:
                raise ConfigError(f"{kind}: unknown task keys {sorted(bad)}")
            params = spec.get("params", DEFAULT_PARAMS.get(kind, {}))
            tasks.append(TaskSpec(kind, spec.get("n", DEFAULT_COUNT), spec.get("seed", 0), params))
        llm = llm_config_from_dict(d, base_dir)
        d.pop("llm", None)
        d.pop("prices", None)
        try:
            return cls(tuple(tasks), llm=llm, **d)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def load(cls, path: str) -> "BenchConfig":
        return cls.from_dict(read_config(path), os.path.dirname(os.path.abspath(path)))

    def translator(self) -> TranslatorChoice:
        if self.mode == "reference":
            return TranslatorChoice()
        return TranslatorChoice.with_llm(self.llm)

    def solve_options(self) -> SolveOptions:
        return SolveOptions(max_models=self.max_models, timeout=self.solve_timeout)


@dataclass(frozen=True)
class InstanceRecord:
    task: str
    index: int
    seed: int
    correct: bool
    cost: Fraction = Fraction(0)
    input_tokens: int = 0
    output_tokens: int = 0
    wall_ms: Optional[float] = None
    answer: Optional[str] = None
    error: Optional[str] = None
    trace: Optional[str] = None  # path relative to the run directory

    def to_dict(self) -> dict:
        d = {
            "task": self.task,
            "index": self.index,
            "seed": self.seed,
            "correct": self.correct,
            "cost": format_cost(self.cost),
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "answer": self.answer,
            "error": self.error,
            "trace": self.trace,
        }
        if self.wall_ms is not None:
            d["wall_ms"] = round(self.wall_ms, 3)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "InstanceRecord":
        d = dict(d)
        d["cost"] = Fraction(d.get("cost", "0"))
        return cls(**d)


@dataclass(frozen=True)
class TaskRow:
    task: str
    n: int
    correct: int
    cost: Fraction
    input_tokens: int
    output_tokens: int
    mean_ms: Optional[float]

    @property
    def accuracy(self) -> Fraction:
        return Fraction(self.correct, self.n) if self.n else Fraction(0)


@dataclass
class BenchReport:
    records: list = field(default_factory=list)
    mode: str = "reference"
    timing: bool = False

    @property
    def rows(self) -> list:
        order = {k: i for i, k in enumerate(TASK_LABELS)}
        by_task: dict = {}
        for r in self.records:
            by_task.setdefault(r.task, []).append(r)
        out = []
        for task in sorted(by_task, key=lambda k: order.get(k, len(order))):
            rs = by_task[task]
            mean = None
            if self.timing:
                mean = sum(r.wall_ms or 0.0 for r in rs) / len(rs)
            out.append(TaskRow(
                task,
                len(rs),
                sum(r.correct for r in rs),
                sum((r.cost for r in rs), Fraction(0)),
                sum(r.input_tokens for r in rs),
                sum(r.output_tokens for r in rs),
                mean,
            ))
        return out

    def row(self, task: str) -> TaskRow:
        for r in self.rows:
            if r.task == task:
                return r
        raise KeyError(task)

    @property
    def total_cost(self) -> Fraction:
        return sum((r.cost for r in self.records), Fraction(0))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "timing": self.timing, "records": [r.to_dict() for r in self.records]}

    @classmethod
    def from_dict(cls, d: dict) -> "BenchReport":
        return cls([InstanceRecord.from_dict(r) for r in d["records"]], d.get("mode", "reference"), d.get("timing", False))


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def score_answer(kind: str, instance, answer) -> bool:
    """Exact match against the independent oracle: a verifier for grids, the simulator for tasks."""
    if answer is None or not answer.solved:
        return False
    if kind in TASK_KINDS:
        return answer.label == bw_oracle_label(instance)
    return verify_grid_answer(kind, instance, answer.value).valid


def _run_one(cfg: BenchConfig, spec: TaskSpec, i: int, bank, cache: RuleCache) -> tuple:
    seed = spec.seed + i
    trace = None
    try:
        gen = generate_instance(spec.kind, spec.params_for(i), seed)
        p = puzzle_instance(spec.kind, question_text(gen.instance))
        answer, trace = solve_puzzle(p, bank, cfg.translator(), cfg.solve_options(), cache, cfg.timing)
        correct = score_answer(spec.kind, gen.instance, answer)
        error = None if trace.ok else f"{trace.error_stage}: {trace.stage(trace.error_stage).error}"
    except Exception as e:  # noqa: BLE001 - one instance never aborts the run
        answer, correct, error = None, False, f"{type(e).__name__}: {e}"
    if error:
        log.warning("%s #%d (seed %d): %s", spec.kind, i, seed, error)
    usage = trace.usage if trace is not None else None
    rel = os.path.join("traces", spec.kind, f"{i:04d}.json") if trace is not None else None
    rec = InstanceRecord(
        spec.kind,
        i,
        seed,
        bool(correct),
        usage.cost if usage else Fraction(0),
        usage.input_tokens if usage else 0,
        usage.output_tokens if usage else 0,
        trace.wall_ms if (trace is not None and cfg.timing) else None,
        answer.to_text() if answer is not None else None,
        error,
        rel,
    )
    return rec, trace


def _check_credentials(cfg: BenchConfig):
    if cfg.mode == "llm" and not os.environ.get(API_KEY_ENV):
        raise ConfigError(f"llm mode needs the {API_KEY_ENV} environment variable")
    if cfg.mode == "replay" and not os.path.exists(cfg.llm.fixtures):
        raise ConfigError(f"fixture file not found: {cfg.llm.fixtures}")


def run_bench(cfg: BenchConfig, progress=None) -> BenchReport:
    """Run every configured task; traces and reports go to ``cfg.out`` when set.

    The first instance of each task runs alone, so it is the one that pays for
    the (cached) rule translation.  That keeps costs deterministic under any
    parallelism setting.
    """
    _check_credentials(cfg)
    banks = {spec.kind: load_bank(spec.kind) for spec in cfg.tasks}
    cache = RuleCache()
    report = BenchReport(mode=cfg.mode, timing=cfg.timing)
    traces = []
    with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
        for spec in cfg.tasks:
            bank = banks[spec.kind]
            first = _run_one(cfg, spec, 0, bank, cache)
            rest = pool.map(lambda i: _run_one(cfg, spec, i, bank, cache), range(1, spec.n))
            for rec, trace in [first, *rest]:
                report.records.append(rec)
                traces.append((rec, trace))
                if progress is not None:
                    progress(rec)
    if cfg.out:
        write_run(report, cfg.out, traces)
    return report


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _csv(r: BenchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in r.rows:
        mean = "" if row.mean_ms is None else f"{row.mean_ms:.3f}"
        w.writerow([row.task, row.n, row.correct, f"{float(row.accuracy):.6f}", format_cost(row.cost), mean])
    return buf.getvalue()


def _markdown(r: BenchReport) -> str:
    rows = {row.task: row for row in r.rows}
    cols = list(TASK_LABELS)
    lines = ["| Method | " + " | ".join(TASK_LABELS[k] for k in cols) + " |"]
    lines.append("|---|" + "---|" * len(cols))
    cells = [f"{float(rows[k].accuracy) * 100:.1f}%" if k in rows else "–" for k in cols]
    lines.append(f"| Logot ({r.mode}) | " + " | ".join(cells) + " |")
    lines += ["", "| Task | Instances | Input tokens | Output tokens | Cost | Cost per instance |", "|---|---|---|---|---|---|"]
    for row in r.rows:
        per = row.cost / row.n if row.n else Fraction(0)
        lines.append(
            f"| {TASK_LABELS.get(row.task, row.task)} | {row.n} | {row.input_tokens} | {row.output_tokens} "
            f"| {format_cost(row.cost)} | {format_cost(per)} |"
        )
    return "\n".join(lines) + "\n"


def emit_report(r: BenchReport, fmt: str = "csv", path: Optional[str] = None) -> str:
    """Render ``r`` as ``csv`` or ``markdown``; also write it to ``path`` when given."""
    if fmt == "csv":
        text = _csv(r)
    elif fmt in ("markdown", "md"):
        text = _markdown(r)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    return text


def write_run(report: BenchReport, out: str, traces=()) -> None:
    os.makedirs(out, exist_ok=True)
    for rec, trace in traces:
        if trace is None or rec.trace is None:
            continue
        path = os.path.join(out, rec.trace)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(trace.to_json())
    with open(os.path.join(out, "results.json"), "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    emit_report(report, "csv", os.path.join(out, "report.csv"))
    emit_report(report, "markdown", os.path.join(out, "report.md"))
