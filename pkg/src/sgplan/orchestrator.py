"""The two-phase planning loop: semantic search, then iterative replanning.

Search starts from the collapsed graph and lets the model expand and contract
rooms until it switches to planning. Replanning asks for a high-level plan,
fills in navigation with the path planner, verifies by simulation and feeds
the first failure back to the model.

Each prompt carries only the current visible graph, the memory list and the
latest feedback string; transcripts are never accumulated.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Collection, Sequence

from .llm.backends import Backend, BackendError
from .llm.parsing import LlmTurn, ParseError, parse_response
from .llm.prompt import PromptDocument, build_prompt
from .path_planner import CompletionError, NavGraph, build_nav_graph, complete_plan
from .scene_graph import GraphOpError, SceneGraph, TokenCounter, approx_tokens
from .simulator import (
    PlanAction,
    Reason,
    VerifyOutcome,
    WorldState,
    execute_plan,
    format_plan,
    init_state,
    verify_plan,
)
from .taxonomy import ErrorClass, classify_failure

logger = logging.getLogger(__name__)

PIPELINES = ("sayplan", "llm_plus_p", "llm_as_planner")
OUTCOMES = ("verified_plan", "search_failed", "plan_failed", "budget_exhausted")


@dataclass
class ModeConfig:
    pipeline: str = "sayplan"
    max_replanning_iterations: int = 5
    max_search_steps: int = 30
    parse_retries: int = 3
    weighting: str = "unit"
    counter: TokenCounter = approx_tokens

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise ValueError(f"unknown pipeline {self.pipeline!r}")
        if self.max_replanning_iterations < 0:
            raise ValueError("max_replanning_iterations must be >= 0")
        if self.max_search_steps < 1 or self.parse_retries < 1:
            raise ValueError("search and parse budgets must be >= 1")


class Trace:
    """Ordered event log; serializes to JSON-lines."""

    def __init__(self):
        self.events: list[dict] = []
        self.prompts: list[PromptDocument] = []

    def add(self, step: int, stage: str, *, prompt: PromptDocument | None = None, response: str | None = None,
            graph_op: str | None = None, visible_size: int | None = None, verify: dict | None = None,
            **extra) -> dict:
        event = {
            "step": step,
            "stage": stage,
            "prompt_hash": prompt.digest() if prompt is not None else None,
            "response": response,
            "graph_op": graph_op,
            "visible_size": visible_size,
            "verify": verify,
        }
        event.update(extra)
        self.events.append(event)
        return event

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, ensure_ascii=False, sort_keys=False) + "\n" for e in self.events)


@dataclass
class SearchState:
    graph: SceneGraph
    memory: list[str] = field(default_factory=list)
    steps: int = 0
    token_trace: list[int] = field(default_factory=list)
    handoff: LlmTurn | None = None
    trace: Trace = field(default_factory=Trace)


class SearchFailed(Exception):
    def __init__(self, message: str, state: SearchState):
        super().__init__(message)
        self.state = state


class _StepFailed(Exception):
    pass


@dataclass
class RunResult:
    outcome: str
    full_plan: list[PlanAction] | None = None
    replanning_iterations: int = 0
    error_class: ErrorClass | None = None
    feedback: str | None = None
    trace: Trace = field(default_factory=Trace)
    search: SearchState | None = None
    final_state: WorldState | None = None
    hallucination_candidates: list[str] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "outcome": self.outcome,
            "full_plan": format_plan(self.full_plan) if self.full_plan is not None else None,
            "replanning_iterations": self.replanning_iterations,
            "error_class": self.error_class.value if self.error_class else None,
            "feedback": self.feedback,
            "memory": list(self.search.memory) if self.search else [],
            "search_steps": self.search.steps if self.search else 0,
            "hallucination_candidates": self.hallucination_candidates,
        }


def _ask(backend: Backend, trace: Trace, config: ModeConfig, *, stage: str, step: int, instruction: str,
         graph_json: str, memory: Sequence[str], feedback: str,
         want_plan: bool) -> tuple[LlmTurn, PromptDocument, str]:
    """Prompt once, re-prompting on unparseable output up to the parse budget."""
    fb = feedback
    for _ in range(config.parse_retries):
        prompt = build_prompt(instruction, graph_json, memory, fb)
        trace.prompts.append(prompt)
        try:
            text = backend.complete(prompt)
        except BackendError as exc:
            trace.add(step, stage, prompt=prompt, error=f"backend: {exc}")
            raise _StepFailed(f"backend error: {exc}") from exc
        try:
            turn = parse_response(text)
        except ParseError as exc:
            fb = f"response was not valid JSON: {exc}"
            trace.add(step, stage, prompt=prompt, response=text, error=fb)
            continue
        if want_plan and turn.plan is None:
            fb = "response was not valid JSON: planning mode requires a verify_plan command with a plan"
            trace.add(step, stage, prompt=prompt, response=text, error=fb)
            continue
        return turn, prompt, text
    raise _StepFailed("parse budget exhausted")


def semantic_search(graph: SceneGraph, instruction: str, backend: Backend, config: ModeConfig | None = None,
                    trace: Trace | None = None) -> SearchState:
    """Explore the collapsed graph until the model switches to planning.

    ``graph`` is collapsed in place. Raises :class:`SearchFailed` when the
    step or parse budget runs out or the backend fails.
    """
    config = config or ModeConfig()
    trace = trace if trace is not None else Trace()
    graph.collapse()
    state = SearchState(graph=graph, trace=trace)
    size = config.counter(graph.serialize_visible())
    state.token_trace.append(size)
    feedback = ""
    while True:
        if state.steps >= config.max_search_steps:
            raise SearchFailed(f"no planning handoff within {config.max_search_steps} search steps", state)
        try:
            turn, prompt, text = _ask(backend, trace, config, stage="search", step=state.steps,
                                      instruction=instruction, graph_json=graph.serialize_visible(),
                                      memory=state.memory, feedback=feedback, want_plan=False)
        except _StepFailed as exc:
            raise SearchFailed(str(exc), state) from None
        state.steps += 1

        if turn.ends_search:
            state.handoff = turn
            state.token_trace.append(config.counter(graph.serialize_visible()))
            trace.add(state.steps - 1, "search", prompt=prompt, response=text,
                      graph_op=turn.command_name if turn.command_name == "terminate" else "planning",
                      visible_size=state.token_trace[-1], memory=list(state.memory))
            return state

        node = turn.node_name
        feedback = ""
        if turn.command_name == "expand_node":
            op = f"expand({node})"
            if node in state.memory:
                feedback = "node already expanded"
            else:
                try:
                    graph.expand(node)
                    state.memory.append(node)
                except GraphOpError as exc:
                    feedback = str(exc)
        else:
            op = f"contract({node})"
            try:
                was_expanded = graph.is_expanded(node)
                graph.contract(node)
                if not was_expanded:
                    feedback = f"{node} is not expanded"
            except GraphOpError as exc:
                feedback = str(exc)
        size = config.counter(graph.serialize_visible())
        state.token_trace.append(size)
        trace.add(state.steps - 1, "search", prompt=prompt, response=text, graph_op=op, visible_size=size,
                  memory=list(state.memory), feedback=feedback or None)


def _completion_failure(exc: CompletionError, here: str) -> VerifyOutcome:
    if exc.reason == "unknown":
        return VerifyOutcome(False, exc.index, Reason.UNKNOWN_NODE, f"{exc.node} does not exist")
    if exc.reason == "not_navigable":
        return VerifyOutcome(False, exc.index, Reason.WRONG_KIND, f"cannot goto {exc.node}: not a room or pose")
    return VerifyOutcome(False, exc.index, Reason.NOT_ADJACENT, f"cannot goto {exc.node}: no route from {here}")


def iterative_replan(search: SearchState, instruction: str, backend: Backend, config: ModeConfig | None = None,
                     required_nodes: Collection[str] | None = None) -> RunResult:
    """Draft plans and repair them from simulator feedback until one verifies or the budget runs out.

    In the baseline pipelines only one plan is generated and verified.
    """
    config = config or ModeConfig()
    graph = search.graph
    trace = search.trace
    start = init_state(graph)
    nav: NavGraph = build_nav_graph(graph, config.weighting)
    complete = config.pipeline in ("sayplan", "llm_plus_p")
    iterate = config.pipeline == "sayplan"

    result = RunResult(outcome="plan_failed", trace=trace, search=search)
    turn = search.handoff if search.handoff is not None and search.handoff.plan is not None else None
    handoff_pending = turn is not None
    feedback = ""
    step = search.steps
    while True:
        if turn is None:
            try:
                turn, prompt, text = _ask(backend, trace, config, stage="plan", step=step,
                                          instruction=instruction, graph_json=graph.serialize_visible(),
                                          memory=search.memory, feedback=feedback, want_plan=True)
            except _StepFailed as exc:
                result.outcome = "plan_failed"
                result.feedback = str(exc)
                break
        else:
            prompt, text = None, None
        high = list(turn.plan)
        for a in high:
            if a.arg is not None and a.arg not in graph.visible and a.arg not in result.hallucination_candidates:
                result.hallucination_candidates.append(a.arg)

        plan = high
        outcome = None
        if complete:
            try:
                plan = complete_plan(high, graph, start.agent_at, nav)
            except CompletionError as exc:
                # Index refers to the high-level plan, which is what gets classified.
                outcome = _completion_failure(exc, start.agent_at)
        if outcome is None:
            outcome = verify_plan(start, graph, plan)
        trace.add(step, "plan", prompt=prompt, response=text, visible_size=config.counter(graph.serialize_visible()),
                  verify=outcome.to_json(), plan=format_plan(high), full_plan=format_plan(plan),
                  handoff=handoff_pending or None)
        handoff_pending = False
        step += 1

        if outcome.ok:
            result.outcome = "verified_plan"
            result.full_plan = plan
            result.feedback = outcome.message
            result.error_class = None
            result.final_state = execute_plan(start, graph, plan)
            break

        result.error_class = classify_failure(plan, graph, graph.visible, outcome, start, required_nodes)
        result.feedback = outcome.feedback
        if not iterate:
            result.outcome = "plan_failed"
            break
        if result.replanning_iterations >= config.max_replanning_iterations:
            result.outcome = "budget_exhausted"
            break
        result.replanning_iterations += 1
        feedback = outcome.feedback
        turn = None

    trace.add(step, "result", **{"result": result.summary()})
    return result


def run_task(graph: SceneGraph, instruction: str, backend: Backend, config: ModeConfig | None = None,
             required_nodes: Collection[str] | None = None) -> RunResult:
    """Run one instruction end to end on a private copy of ``graph``."""
    config = config or ModeConfig()
    work = graph.copy()
    trace = Trace()
    try:
        search = semantic_search(work, instruction, backend, config, trace)
    except SearchFailed as exc:
        result = RunResult(outcome="search_failed", feedback=str(exc), trace=trace, search=exc.state)
        if required_nodes and any(n not in work.visible for n in required_nodes):
            result.error_class = ErrorClass.INCOMPLETE_SEARCH
        trace.add(exc.state.steps, "result", result=result.summary())
        return result
    return iterative_replan(search, instruction, backend, config, required_nodes)
