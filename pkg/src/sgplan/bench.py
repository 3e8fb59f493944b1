"""Run a suite of task fixtures and aggregate the results.

Report rows are derived from each run's trace (its final ``result`` event)
plus the fixture, so a report can be rebuilt byte-for-byte from saved traces.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .fixtures import ENVIRONMENTS, env_path, load_env
from .llm.backends import BackendConfig, make_backend
from .orchestrator import ModeConfig, run_task
from .scene_graph import SceneGraph
from .simulator import ActionError, execute_plan, init_state, parse_plan
from .taxonomy import ErrorClass

logger = logging.getLogger(__name__)

FAMILIES = ("simple_search", "complex_search", "simple_planning", "long_horizon")


class SuiteError(ValueError):
    pass


@dataclass
class TaskFixture:
    id: str
    instruction: str
    environment: str
    family: str
    required_nodes: list[str] | None = None
    cassette: str | None = None
    expected: dict | None = None
    mode: str | None = None


@dataclass
class BenchReport:
    rows: list[dict] = field(default_factory=list)
    families: dict[str, dict] = field(default_factory=dict)
    error_classes: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {"rows": self.rows, "families": self.families, "error_classes": self.error_classes}
        return json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def load_suite(path: str | Path) -> list[TaskFixture]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise SuiteError(f"{path}: {exc}") from None
    base = path.parent
    tasks = []
    seen = set()
    for raw in doc.get("tasks", []):
        try:
            task = TaskFixture(**raw)
        except TypeError as exc:
            raise SuiteError(f"{path}: {exc}") from None
        if task.id in seen:
            raise SuiteError(f"duplicate task id {task.id}")
        seen.add(task.id)
        if task.family not in FAMILIES:
            raise SuiteError(f"{task.id}: unknown family {task.family!r}")
        if task.environment in ENVIRONMENTS:
            env = env_path(task.environment)
        else:
            env = Path(task.environment)
            if not env.is_absolute():
                env = base / env
        if not env.exists():
            raise SuiteError(f"{task.id}: environment {task.environment} not found")
        task.environment = str(env)
        if task.cassette is not None:
            cas = Path(task.cassette)
            if not cas.is_absolute():
                cas = base / cas
            if not cas.exists():
                raise SuiteError(f"{task.id}: cassette {task.cassette} not found")
            task.cassette = str(cas)
        tasks.append(task)
    return tasks


def _final_state(graph: SceneGraph, plan: Sequence[str] | None):
    if not plan:
        return None
    try:
        return execute_plan(init_state(graph), graph, parse_plan(plan))
    except ActionError:
        return None


def _goal_met(expected: dict, result: dict, graph: SceneGraph) -> bool:
    if "outcome" in expected and expected["outcome"] != result["outcome"]:
        return False
    if "error_class" in expected and expected["error_class"] != result["error_class"]:
        return False
    goal = expected.get("goal")
    if goal:
        state = _final_state(graph, result.get("full_plan"))
        if state is None:
            return False
        snap = state.to_json()
        for key in ("agent_at", "holding"):
            if key in goal and goal[key] != snap[key]:
                return False
        for key in ("node_states", "containment"):
            for nid, want in goal.get(key, {}).items():
                if snap[key].get(nid) != want:
                    return False
    return True


def row_from_trace(task: TaskFixture, events: Sequence[dict]) -> dict:
    results = [e for e in events if e.get("stage") == "result"]
    if not results:
        return {"id": task.id, "family": task.family, "outcome": "error", "executable": False, "correct": None,
                "replanning_iterations": 0, "error_class": None}
    result = results[-1]["result"]
    correct = None
    if task.expected is not None:
        correct = _goal_met(task.expected, result, load_env(task.environment))
    return {
        "id": task.id,
        "family": task.family,
        "outcome": result["outcome"],
        "executable": result["outcome"] == "verified_plan",
        "correct": correct,
        "replanning_iterations": result["replanning_iterations"],
        "error_class": result["error_class"],
    }


def aggregate(rows: Sequence[dict]) -> BenchReport:
    report = BenchReport(rows=list(rows))
    for fam in FAMILIES:
        sub = [r for r in rows if r["family"] == fam]
        if not sub:
            continue
        graded = [r for r in sub if r["correct"] is not None]
        hist: dict[str, int] = {}
        for r in sub:
            if r["error_class"]:
                hist[r["error_class"]] = hist.get(r["error_class"], 0) + 1
        report.families[fam] = {
            "tasks": len(sub),
            "executability": round(sum(r["executable"] for r in sub) / len(sub), 6),
            "correctness": round(sum(r["correct"] for r in graded) / len(graded), 6) if graded else None,
            "mean_replanning_iterations": round(sum(r["replanning_iterations"] for r in sub) / len(sub), 6),
            "error_classes": hist,
        }
    for cls in ErrorClass:
        n = sum(1 for r in rows if r["error_class"] == cls.value)
        if n:
            report.error_classes[cls.value] = n
    return report


def run_fixture(task: TaskFixture, backend: BackendConfig, mode: ModeConfig, mode_override: str | None = None):
    """Run one task in isolation; return its trace events (never raises)."""
    pipeline = mode_override or task.mode or mode.pipeline
    try:
        cfg = replace(backend, cassette=task.cassette) if backend.kind == "scripted" else backend
        result = run_task(load_env(task.environment), task.instruction, make_backend(cfg),
                          replace(mode, pipeline=pipeline), task.required_nodes)
    except Exception as exc:  # a broken task must not abort the suite
        logger.error("task %s crashed: %s", task.id, exc)
        return [{"step": 0, "stage": "error", "error": f"{type(exc).__name__}: {exc}"}]
    return result.trace.events


def run_suite(tasks: Sequence[TaskFixture], backend: BackendConfig, mode: ModeConfig,
              mode_override: str | None = None, jobs: int = 1) -> tuple[BenchReport, list[list[dict]]]:
    def one(task):
        return run_fixture(task, backend, mode, mode_override)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            traces = list(pool.map(one, tasks))
    else:
        traces = [one(t) for t in tasks]
    return report_from_traces(tasks, traces), traces


def report_from_traces(tasks: Sequence[TaskFixture], traces: Sequence[Sequence[dict]]) -> BenchReport:
    return aggregate([row_from_trace(t, ev) for t, ev in zip(tasks, traces)])
