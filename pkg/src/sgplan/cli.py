"""Command-line entry point.

Exit codes: 0 success, 1 domain failure (violations, failed plan), 2 usage,
configuration or I/O problems.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .config import TOKENIZERS, Settings, resolve_settings
from .fixtures import env_path
from .llm.backends import BackendError, ConfigError, make_backend
from .orchestrator import SearchFailed, Trace, run_task, semantic_search
from .scene_graph import GraphError, SceneGraph, load_graph
from .simulator import ActionSyntaxError, format_plan, init_state, parse_plan, verify_plan

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_env(path: str, strict: bool = True) -> SceneGraph:
    p = env_path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return load_graph(text, strict=strict)
    except GraphError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _settings(args) -> Settings:
    backend: dict = {}
    mode: dict = {}
    if getattr(args, "backend", None):
        backend["kind"] = args.backend
    if getattr(args, "cassette", None):
        backend["cassette"] = args.cassette
    if getattr(args, "record", None):
        backend["record_to"] = args.record
    if getattr(args, "model", None):
        backend["model"] = args.model
    if getattr(args, "endpoint", None):
        backend["endpoint"] = args.endpoint
    if getattr(args, "mode", None):
        mode["pipeline"] = args.mode
    if getattr(args, "max_replans", None) is not None:
        mode["max_replanning_iterations"] = args.max_replans
    if getattr(args, "max_search_steps", None) is not None:
        mode["max_search_steps"] = args.max_search_steps
    flags = {"backend": backend, "mode": mode, "tokenizer": getattr(args, "tokenizer", None)}
    return resolve_settings(flags, getattr(args, "config", None))


def cmd_validate(args) -> int:
    graph = _read_env(args.env, strict=False)
    violations = graph.validate()
    for v in violations:
        print(f"{v.rule}: {v.message}")
    if violations:
        return EXIT_FAIL
    print(f"{args.env}: ok")
    return EXIT_OK


def _stats_row(label: str, counts: dict, edges: int, chars: int, tokens: int) -> str:
    cells = " ".join(f"{k} {counts[k]}" for k in counts if counts[k])
    return f"{label:<10} {cells} | edges {edges} | chars {chars} | tokens {tokens}"


def cmd_stats(args) -> int:
    if args.tokenizer and args.tokenizer not in TOKENIZERS:
        raise ConfigError(f"unknown tokenizer {args.tokenizer!r}")
    graph = _read_env(args.env)
    counter = TOKENIZERS[args.tokenizer or "chars4"]
    full = graph.stats(counter)
    graph.collapse()
    st = graph.stats(counter)
    if args.json:
        print(json.dumps(st.to_json(), sort_keys=True))
        return EXIT_OK
    print(_stats_row("full", full.counts, full.edges, full.full_chars, full.full_tokens))
    if args.collapsed:
        collapsed_edges = len(json.loads(graph.serialize_visible())["links"])
        print(_stats_row("collapsed", st.visible_counts, collapsed_edges, st.visible_chars, st.visible_tokens))
    print(f"compression ratio {st.compression_ratio:.3f}")
    return EXIT_OK


def cmd_search(args) -> int:
    settings = _settings(args)
    graph = _read_env(args.env)
    backend = make_backend(settings.backend)
    try:
        state = semantic_search(graph, args.instruction, backend, settings.mode, Trace())
    except SearchFailed as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(graph.serialize_visible())
    print("Memory: [" + ", ".join(state.memory) + "]")
    return EXIT_OK


def cmd_plan(args) -> int:
    settings = _settings(args)
    graph = _read_env(args.env)
    backend = make_backend(settings.backend)
    required = args.required.split(",") if args.required else None
    result = run_task(graph, args.instruction, backend, settings.mode, required)
    if args.trace_out:
        Path(args.trace_out).write_text(result.trace.to_jsonl(), encoding="utf-8")
    if result.outcome == "verified_plan":
        plan = format_plan(result.full_plan)
        text = json.dumps(plan, ensure_ascii=False)
        if args.plan_out:
            Path(args.plan_out).write_text(text + "\n", encoding="utf-8")
        print(text)
        print(f"Plan Verified after {result.replanning_iterations} replanning iteration(s)")
        return EXIT_OK
    cls = result.error_class.value if result.error_class else "unclassified"
    print(f"{result.outcome}: {result.feedback} [{cls}]", file=sys.stderr)
    return EXIT_FAIL


def cmd_verify(args) -> int:
    graph = _read_env(args.env)
    try:
        raw = json.loads(Path(args.plan).read_text(encoding="utf-8"))
        plan = parse_plan(raw)
    except OSError as exc:
        raise UsageError(f"cannot read {args.plan}: {exc.strerror or exc}") from None
    except (ValueError, ActionSyntaxError, TypeError) as exc:
        raise UsageError(f"{args.plan}: malformed plan ({exc})") from None
    outcome = verify_plan(init_state(graph), graph, plan)
    print(outcome.message)
    return EXIT_OK if outcome.ok else EXIT_FAIL


def cmd_bench(args) -> int:
    settings = _settings(args)
    try:
        tasks = bench.load_suite(args.suite)
    except OSError as exc:
        raise UsageError(f"cannot read {args.suite}: {exc.strerror or exc}") from None
    except bench.SuiteError as exc:
        raise UsageError(str(exc)) from None
    report, traces = bench.run_suite(tasks, settings.backend, settings.mode, args.mode, args.jobs)
    text = report.to_json()
    if args.report_out:
        Path(args.report_out).write_text(text, encoding="utf-8")
    if args.trace_dir:
        out = Path(args.trace_dir)
        out.mkdir(parents=True, exist_ok=True)
        for task, events in zip(tasks, traces):
            (out / f"{task.id}.jsonl").write_text(
                "".join(json.dumps(e, ensure_ascii=False) + "\n" for e in events), encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def _add_backend_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", help="remote or scripted")
    p.add_argument("--cassette", help="JSON-lines cassette for the scripted backend")
    p.add_argument("--record", help="append every model exchange to this cassette")
    p.add_argument("--model")
    p.add_argument("--endpoint")
    p.add_argument("--mode", help="sayplan, llm_plus_p or llm_as_planner")
    p.add_argument("--max-search-steps", type=int)
    p.add_argument("--config", help="YAML or JSON config file")
    p.add_argument("--tokenizer", help=f"one of {', '.join(TOKENIZERS)}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgplan", description="Scene-graph task planning engine")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an environment file")
    p.add_argument("env")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="entity counts and compression ratio")
    p.add_argument("env")
    p.add_argument("--collapsed", action="store_true", help="also show the collapsed view")
    p.add_argument("--tokenizer")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("search", help="run semantic search only")
    p.add_argument("env")
    p.add_argument("instruction")
    _add_backend_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("plan", help="search, plan and verify")
    p.add_argument("env")
    p.add_argument("instruction")
    _add_backend_flags(p)
    p.add_argument("--max-replans", type=int)
    p.add_argument("--required", help="comma-separated nodes the search must reveal")
    p.add_argument("--plan-out")
    p.add_argument("--trace-out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("verify", help="verify a plan file from the initial state")
    p.add_argument("env")
    p.add_argument("plan")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run a task suite")
    p.add_argument("suite")
    _add_backend_flags(p)
    p.add_argument("--max-replans", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report-out")
    p.add_argument("--trace-dir")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
