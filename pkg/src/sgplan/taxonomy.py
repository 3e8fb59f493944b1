"""Map a failed plan to one of the five plan-error classes."""

from __future__ import annotations

import enum
from typing import Collection, Iterator, Sequence

from .scene_graph import SceneGraph
from .simulator import PlanAction, Reason, VerifyOutcome, WorldState, init_state, verify_plan


class ErrorClass(str, enum.Enum):
    MISSING_ACTION = "Missing Action"
    MISSING_POSE = "Missing Pose"
    WRONG_ACTION = "Wrong Action"
    INCOMPLETE_SEARCH = "Incomplete Search"
    HALLUCINATED_NODES = "Hallucinated Nodes"


_REPAIR_WINDOW = 12


def _candidates(graph: SceneGraph, state: WorldState) -> Iterator[PlanAction]:
    for nid, node in graph.nodes.items():
        if node.kind == "asset":
            yield PlanAction("access", nid)
            for verb in ("open", "close", "turn_on", "turn_off"):
                if verb in node.affordances:
                    yield PlanAction(verb, nid)
        elif node.kind in ("room", "pose"):
            yield PlanAction("goto", nid)
        elif node.kind == "object":
            yield PlanAction("release", nid)
            for verb in ("turn_on", "turn_off"):
                if verb in node.affordances:
                    yield PlanAction(verb, nid)


def single_insertion_repair(
    plan: Sequence[PlanAction], graph: SceneGraph, state: WorldState, failed_index: int
) -> PlanAction | None:
    """Find one action whose insertion lets the plan get past ``failed_index``."""
    prefix = list(plan[: failed_index + 1])
    lo = max(0, failed_index - _REPAIR_WINDOW)
    for pos in range(failed_index, lo - 1, -1):
        for cand in _candidates(graph, state):
            trial = prefix[:pos] + [cand] + prefix[pos:]
            if verify_plan(state, graph, trial).ok:
                return cand
    return None


def classify_failure(
    plan: Sequence[PlanAction],
    graph: SceneGraph,
    visible: Collection[str],
    outcome: VerifyOutcome,
    state: WorldState | None = None,
    required_nodes: Collection[str] | None = None,
) -> ErrorClass:
    """Deterministically assign exactly one error class to a failed outcome.

    Precedence: unknown node, unrevealed required node, node outside G',
    missing pose, repairable-by-one-insertion, everything else.
    """
    if outcome.ok:
        raise ValueError("cannot classify a successful outcome")
    reason = outcome.reason
    idx = outcome.failed_index
    action = plan[idx] if idx is not None and 0 <= idx < len(plan) else None

    if reason is Reason.UNKNOWN_NODE:
        return ErrorClass.HALLUCINATED_NODES
    if required_nodes and any(n not in visible for n in required_nodes):
        return ErrorClass.INCOMPLETE_SEARCH
    if action is not None and action.arg is not None and action.arg not in visible:
        return ErrorClass.HALLUCINATED_NODES
    if reason is Reason.NOT_ADJACENT:
        return ErrorClass.MISSING_POSE
    if reason in (Reason.NO_AFFORDANCE, Reason.WRONG_KIND) or action is None:
        return ErrorClass.WRONG_ACTION
    state = state if state is not None else init_state(graph)
    if single_insertion_repair(plan, graph, state, idx) is not None:
        return ErrorClass.MISSING_ACTION
    return ErrorClass.WRONG_ACTION
