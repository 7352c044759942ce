"""``logot`` command line: gen, translate, ground, solve, run, report.

Exit codes: ``solve`` returns 10 (satisfiable), 20 (unsatisfiable), 30
(optimum proven) or 0 (stopped by the timeout before an answer).  Every other
command returns 0 on success.  A bad configuration or bad input gives 2, and a
runtime failure gives 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .asp import OPTIMUM, SAT, UNSAT, ASPSyntaxError, GroundingError, SolveOptions, ground, parse_program, solve
from .bench import (
    BENCH_MODES,
    DEFAULT_PARAMS,
    TASK_LABELS,
    BenchConfig,
    BenchReport,
    ConfigError,
    TaskSpec,
    emit_report,
    llm_config_from_dict,
    read_config,
    run_bench,
)
from .pipeline import TranslatorChoice, program_text, translate_puzzle
from .puzzles import PUZZLE_KINDS, TASK_KINDS, format_task, generate_instance
from .translate import LlmConfig, load_bank, puzzle_instance, question_text

EXIT_SAT, EXIT_UNSAT, EXIT_OPTIMUM = 10, 20, 30
EXIT_ERROR, EXIT_CONFIG = 1, 2


class _UsageError(Exception):
    pass


def _tasks(arg) -> list:
    if arg in (None, "all"):
        return list(TASK_LABELS)
    kinds = [k.strip() for k in arg.split(",") if k.strip()]
    for k in kinds:
        if k not in PUZZLE_KINDS:
            raise _UsageError(f"unknown task {k!r}; choose from {', '.join(PUZZLE_KINDS)}")
    return kinds


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def _llm_config(args) -> LlmConfig:
    """LLM settings: the config file's ``llm`` section, then ``--fixtures`` / ``--mode`` on top."""
    d: dict = {}
    if args.config:
        base = os.path.dirname(os.path.abspath(args.config))
        cfg = llm_config_from_dict(read_config(args.config), base)
        if cfg is not None:
            d = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    if args.fixtures:
        d["fixtures"] = args.fixtures
    if args.mode == "replay":
        d["mode"] = "replay"
    elif args.mode == "llm" and d.get("mode", "replay") == "replay":
        d["mode"] = "record" if d.get("fixtures") else "live"
    try:
        return LlmConfig.from_dict(d)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"llm settings: {e}") from None


def _translator(args) -> TranslatorChoice:
    if args.mode == "reference":
        return TranslatorChoice()
    return TranslatorChoice.with_llm(_llm_config(args))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    try:
        params = json.loads(args.params) if args.params else None
    except ValueError as e:
        raise _UsageError(f"--params is not valid JSON: {e}") from None
    for kind in _tasks(args.task):
        spec = TaskSpec(kind, args.n, args.seed, params if params is not None else DEFAULT_PARAMS.get(kind, {}))
        out_dir = os.path.join(args.out, kind) if args.out else None
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
        for i in range(spec.n):
            gen = generate_instance(kind, spec.params_for(i), spec.seed + i)
            if kind in TASK_KINDS:
                text = format_task(gen.instance)
            else:
                text = question_text(gen.instance)
            if out_dir:
                path = os.path.join(out_dir, f"{i:04d}.txt")
                with open(path, "w", encoding="utf-8") as f:
                    f.write(text)
                print(path)
            else:
                print(f"# {kind} {i} (seed {spec.seed + i})")
                print(text, end="" if text.endswith("\n") else "\n")
    return 0


def cmd_translate(args) -> int:
    kinds = _tasks(args.task)
    if len(kinds) != 1:
        raise _UsageError("translate needs exactly one --task")
    kind = kinds[0]
    question = _read(args.file)
    if kind in TASK_KINDS:
        from .puzzles import parse_task

        question = question_text(parse_task(question, kind))
    p = puzzle_instance(kind, question)
    program, trace = translate_puzzle(p, load_bank(kind), _translator(args))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "trace.json"), "w", encoding="utf-8") as f:
            f.write(trace.to_json())
    if program is None:
        stage = trace.stage(trace.error_stage)
        print(f"translation failed at {stage.name}: {stage.error}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(program_text(trace))
    return 0


def _consts(items) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise _UsageError(f"--const expects name=value, got {item!r}")
        try:
            out[name.strip()] = int(value)
        except ValueError:
            raise _UsageError(f"--const value must be an integer: {item!r}") from None
    return out


def _load_ground(args):
    program = parse_program("".join(_read(f) for f in args.files))
    return ground(program, consts=_consts(args.const))


def cmd_ground(args) -> int:
    g = _load_ground(args)
    text = g.format()
    print(text if text else "% (empty ground program)")
    print(f"% atoms: {g.num_atoms}  rules: {len(g.rules)}", file=sys.stderr)
    return 0


def cmd_solve(args) -> int:
    g = _load_ground(args)
    opts = SolveOptions(max_models=args.models, optimize=not args.no_optimize, timeout=args.timeout)
    res = solve(g, opts)
    for i, m in enumerate(res.models, 1):
        print(f"Answer: {i}")
        print(str(m))
        if m.cost is not None and g.minimize:
            print(f"Optimization: {m.cost}")
    words = {SAT: "SATISFIABLE", UNSAT: "UNSATISFIABLE", OPTIMUM: "OPTIMUM FOUND"}
    print(words.get(res.status, "UNKNOWN"))
    print(f"Models: {len(res.models)}  Decisions: {res.statistics['decisions']}  Conflicts: {res.statistics['conflicts']}",
          file=sys.stderr)
    return {SAT: EXIT_SAT, UNSAT: EXIT_UNSAT, OPTIMUM: EXIT_OPTIMUM}.get(res.status, 0)


def _bench_config(args) -> BenchConfig:
    if args.config:
        cfg = BenchConfig.load(args.config)
    else:
        cfg = BenchConfig.default(quick=args.quick)
    tasks = cfg.tasks
    if args.task:
        wanted = _tasks(args.task)
        have = {t.kind: t for t in tasks}
        tasks = tuple(have.get(k) or BenchConfig.default().tasks[list(TASK_LABELS).index(k)] for k in wanted)
    if args.quick or args.n is not None or args.seed is not None:
        n = args.n if args.n is not None else (20 if args.quick else None)
        tasks = tuple(
            TaskSpec(t.kind, n if n is not None else t.n, args.seed if args.seed is not None else t.seed, t.params)
            for t in tasks
        )
    mode = args.mode or cfg.mode
    llm = cfg.llm
    if mode != "reference":
        llm = _llm_config(args)
    return BenchConfig(
        tasks,
        mode,
        llm,
        args.jobs or cfg.parallelism,
        args.out or cfg.out,
        args.timing or cfg.timing,
        cfg.solve_timeout,
        cfg.max_models,
    )


def cmd_run(args) -> int:
    cfg = _bench_config(args)

    def progress(rec):
        if args.verbose:
            mark = "ok" if rec.correct else "WRONG"
            print(f"{rec.task} #{rec.index}: {mark}" + (f" ({rec.error})" if rec.error else ""), file=sys.stderr)

    report = run_bench(cfg, progress)
    sys.stdout.write(emit_report(report, "csv"))
    if cfg.out:
        print(f"run written to {cfg.out}", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    path = args.run
    if os.path.isdir(path):
        path = os.path.join(path, "results.json")
    try:
        with open(path, encoding="utf-8") as f:
            report = BenchReport.from_dict(json.load(f))
    except (OSError, ValueError, KeyError) as e:
        raise _UsageError(f"cannot read results from {args.run}: {e}") from None
    sys.stdout.write(emit_report(report, args.format, args.out))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="logot", description="Puzzle solving by translation to answer set programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, task=True):
        if task:
            p.add_argument("--task", help="puzzle kind, a comma-separated list, or 'all'")
        p.add_argument("--mode", choices=BENCH_MODES, help="translator: reference, llm (live/record) or replay")
        p.add_argument("--fixtures", metavar="FILE", help="LLM fixture file (JSON lines)")
        p.add_argument("--config", metavar="FILE", help="JSON bench/LLM config")
        p.add_argument("--out", metavar="DIR", help="output directory")

    p = sub.add_parser("gen", help="generate puzzle instances")
    p.add_argument("--task", help="puzzle kind, a comma-separated list, or 'all'")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--params", help="generator parameters as JSON (lists cycle per instance)")
    p.add_argument("--out", metavar="DIR", help="write one file per instance under DIR/<task>/")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("translate", help="translate one instance file into an answer set program")
    p.add_argument("file", help="instance file, or - for stdin")
    common(p)
    p.set_defaults(fn=cmd_translate, mode="reference")

    for name, fn, extra in (("ground", cmd_ground, False), ("solve", cmd_solve, True)):
        p = sub.add_parser(name, help=f"{name} an answer set program")
        p.add_argument("files", nargs="+", help="program files (- for stdin)")
        p.add_argument("--const", action="append", metavar="NAME=VALUE", help="override a #const")
        if extra:
            p.add_argument("--models", type=int, default=1, help="number of models, 0 for all")
            p.add_argument("--no-optimize", action="store_true", help="ignore #minimize")
            p.add_argument("--timeout", type=float, default=60.0)
        p.set_defaults(fn=fn)

    p = sub.add_parser("run", help="run the benchmark")
    common(p)
    p.add_argument("--n", type=int, help="instances per task")
    p.add_argument("--seed", type=int, help="first seed per task")
    p.add_argument("--quick", action="store_true", help="20 instances per task")
    p.add_argument("--jobs", type=int, help="worker threads")
    p.add_argument("--timing", action="store_true", help="record wall times (reports are then not reproducible)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("report", help="render a finished run's results")
    p.add_argument("run", help="run directory or results.json")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p.add_argument("--out", metavar="FILE", help="also write the report to FILE")
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (_UsageError, ConfigError) as e:
        print(f"logot: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ASPSyntaxError, GroundingError, ValueError, OSError) as e:
        print(f"logot: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(e, (ValueError, OSError)) else EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
