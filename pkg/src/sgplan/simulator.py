"""Symbolic world state and plan verification by forward simulation.

Actions are checked in a fixed order (node exists, node kind, affordance,
location, accessibility, state) so that the first failing precondition, and
hence the reason code, is deterministic.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Sequence

from .scene_graph import CONTAINMENT_RE, SceneGraph

VERBS = ("goto", "access", "pickup", "release", "open", "close", "turn_on", "turn_off", "done")
PLAN_VERIFIED = "Plan Verified"

_ACTION_RE = re.compile(r"^\s*([A-Za-z_]+)\s*(?:\(\s*([^()]*?)\s*\))?\s*$")


class Reason(str, enum.Enum):
    NOT_ACCESSIBLE = "NOT_ACCESSIBLE"
    HAND_OCCUPIED = "HAND_OCCUPIED"
    WRONG_LOCATION = "WRONG_LOCATION"
    NO_AFFORDANCE = "NO_AFFORDANCE"
    BAD_STATE = "BAD_STATE"
    UNKNOWN_NODE = "UNKNOWN_NODE"
    NOT_ADJACENT = "NOT_ADJACENT"
    WRONG_KIND = "WRONG_KIND"


class ActionSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class PlanAction:
    verb: str
    arg: str | None = None

    def __post_init__(self):
        if self.verb not in VERBS:
            raise ActionSyntaxError(f"unknown action {self.verb!r}")
        if (self.arg is None) != (self.verb == "done"):
            raise ActionSyntaxError(
                "done takes no argument" if self.verb == "done" else f"{self.verb} needs a node argument"
            )

    @classmethod
    def parse(cls, text: str) -> PlanAction:
        if not isinstance(text, str):
            raise ActionSyntaxError(f"action must be a string, got {type(text).__name__}")
        m = _ACTION_RE.match(text)
        if not m:
            raise ActionSyntaxError(f"malformed action {text!r}")
        verb, arg = m.group(1), m.group(2)
        return cls(verb, arg or None)

    def __str__(self) -> str:
        return "done" if self.verb == "done" else f"{self.verb}({self.arg})"


def parse_plan(items: Sequence[str] | str) -> list[PlanAction]:
    """Parse a plan given as a list of ``verb(arg)`` strings or as ``a > b > c`` text."""
    if isinstance(items, str):
        body = items.strip()
        if body.startswith("[") and body.endswith("]"):
            body = body[1:-1]
        items = [part for part in body.split(">") if part.strip()]
    return [PlanAction.parse(item) for item in items]


def format_plan(plan: Sequence[PlanAction]) -> list[str]:
    return [str(a) for a in plan]


@dataclass
class WorldState:
    agent_at: str
    holding: str | None = None
    accessed: str | None = None
    node_states: dict[str, str] = field(default_factory=dict)
    # object id -> (relation, target); relation in inside_of/ontop_of/inside_hand/in_room
    containment: dict[str, tuple[str, str | None]] = field(default_factory=dict)

    def copy(self) -> WorldState:
        return WorldState(
            self.agent_at, self.holding, self.accessed, dict(self.node_states), dict(self.containment)
        )

    def placement(self, obj: str) -> str:
        rel, target = self.containment[obj]
        return rel if target is None else f"{rel}({target})"

    def to_json(self) -> dict:
        return {
            "agent_at": self.agent_at,
            "holding": self.holding,
            "accessed": self.accessed,
            "node_states": dict(sorted(self.node_states.items())),
            "containment": {o: self.placement(o) for o in sorted(self.containment)},
        }


class ActionError(Exception):
    def __init__(self, reason: Reason, feedback: str, action: PlanAction | None = None, index: int | None = None):
        super().__init__(feedback)
        self.reason = reason
        self.feedback = feedback
        self.action = action
        self.index = index


@dataclass(frozen=True)
class VerifyOutcome:
    ok: bool
    failed_index: int | None = None
    reason: Reason | None = None
    feedback: str | None = None

    @property
    def message(self) -> str:
        return PLAN_VERIFIED if self.ok else self.feedback

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "failed_index": self.failed_index,
            "reason": self.reason.value if self.reason else None,
            "feedback": self.message,
        }


class StateInitError(ValueError):
    pass


def init_state(graph: SceneGraph) -> WorldState:
    agent = graph.agent
    loc = agent.location
    if loc is None or loc not in graph.nodes or graph.nodes[loc].kind not in ("room", "pose"):
        raise StateInitError(f"agent location {loc!r} is not a room or pose")
    state = WorldState(agent_at=loc)
    for nid, node in graph.nodes.items():
        if node.kind == "asset":
            if node.state is not None:
                state.node_states[nid] = node.state
        elif node.kind == "object":
            tok = node.state
            parent = graph.parent.get(nid)
            m = CONTAINMENT_RE.match(tok) if tok else None
            if m:
                state.containment[nid] = (m.group(1), m.group(2))
                continue
            if tok == "inside_hand":
                if state.holding is not None:
                    raise StateInitError(f"both {state.holding} and {nid} are inside_hand")
                state.containment[nid] = ("inside_hand", None)
                state.holding = nid
                continue
            if tok in ("on", "off", "open", "closed"):
                state.node_states[nid] = tok
            state.containment[nid] = _default_placement(graph, state, parent)
    return state


def _default_placement(graph: SceneGraph, state: WorldState, parent: str | None) -> tuple[str, str | None]:
    if parent is None:
        raise StateInitError("object without a parent room or asset")
    if graph.nodes[parent].kind == "room":
        return ("in_room", parent)
    if _openable(graph, parent) and state.node_states.get(parent) != "open":
        return ("inside_of", parent)
    return ("ontop_of", parent)


def _openable(graph: SceneGraph, asset: str) -> bool:
    aff = graph.nodes[asset].affordances
    return "open" in aff or "close" in aff


def _spoken(node_id: str) -> str:
    return node_id.replace("_", " ")


def _fail(reason: Reason, feedback: str, action: PlanAction) -> ActionError:
    return ActionError(reason, feedback, action)


def _object_room(graph: SceneGraph, state: WorldState, obj: str) -> str | None:
    rel, target = state.containment[obj]
    if rel == "inside_hand":
        return state.agent_at
    if rel == "in_room":
        return target
    return graph.room_of(target)


def _object_accessible(graph: SceneGraph, state: WorldState, obj: str) -> bool:
    rel, target = state.containment[obj]
    if rel == "inside_hand":
        return True
    if rel == "in_room":
        return target == state.agent_at
    if state.accessed != target:
        return False
    return not _openable(graph, target) or state.node_states.get(target) == "open"


def apply_action(state: WorldState, graph: SceneGraph, action: PlanAction) -> WorldState:
    """Return the successor state, or raise :class:`ActionError`."""
    verb, arg = action.verb, action.arg
    if verb == "done":
        return state.copy()
    node = graph.nodes.get(arg)
    if node is None:
        raise _fail(Reason.UNKNOWN_NODE, f"{arg} does not exist", action)

    new = state.copy()

    if verb == "goto":
        if node.kind not in ("room", "pose"):
            raise _fail(Reason.WRONG_KIND, f"cannot goto {arg}: not a room or pose", action)
        if arg != state.agent_at:
            neighbours = graph.adjacency.get(state.agent_at, ())
            if arg not in neighbours:
                raise _fail(
                    Reason.NOT_ADJACENT,
                    f"cannot goto {arg}: no direct connection from {state.agent_at}",
                    action,
                )
        new.agent_at = arg
        new.accessed = None
        return new

    if verb == "access":
        if node.kind != "asset":
            raise _fail(Reason.WRONG_KIND, f"cannot access {arg}: not an asset", action)
        room = graph.room_of(arg)
        if room != state.agent_at:
            raise _fail(Reason.WRONG_LOCATION, f"cannot access {arg}: agent is not at {room}", action)
        new.accessed = arg
        return new

    if verb == "pickup":
        if node.kind != "object":
            raise _fail(Reason.WRONG_KIND, f"cannot pickup {arg}: not an object", action)
        if "pickup" not in node.affordances:
            raise _fail(Reason.NO_AFFORDANCE, f"cannot pickup {arg}: affordance not available", action)
        if state.holding is not None:
            raise _fail(Reason.HAND_OCCUPIED, f"cannot pickup {arg}: hand is occupied", action)
        room = _object_room(graph, state, arg)
        if room != state.agent_at:
            raise _fail(Reason.WRONG_LOCATION, f"cannot pickup {arg}: agent is not at {room}", action)
        if not _object_accessible(graph, state, arg):
            raise _fail(Reason.NOT_ACCESSIBLE, f"{_spoken(arg)} is not accessible", action)
        new.containment[arg] = ("inside_hand", None)
        new.holding = arg
        return new

    if verb == "release":
        if node.kind != "object":
            raise _fail(Reason.WRONG_KIND, f"cannot release {arg}: not an object", action)
        if state.holding != arg:
            raise _fail(Reason.BAD_STATE, f"cannot release {arg}: {arg} is {state.placement(arg)}", action)
        target = state.accessed
        if target is None:
            raise _fail(Reason.WRONG_LOCATION, f"cannot release {arg}: agent is not at an asset", action)
        if "release" not in graph.nodes[target].affordances:
            raise _fail(Reason.NO_AFFORDANCE, f"cannot release {target}: affordance not available", action)
        if _openable(graph, target) and state.node_states.get(target) == "open":
            new.containment[arg] = ("inside_of", target)
        else:
            new.containment[arg] = ("ontop_of", target)
        new.holding = None
        return new

    if verb in ("open", "close"):
        if node.kind != "asset":
            raise _fail(Reason.WRONG_KIND, f"cannot {verb} {arg}: not an asset", action)
        if verb not in node.affordances:
            raise _fail(Reason.NO_AFFORDANCE, f"cannot {verb} {arg}: affordance not available", action)
        room = graph.room_of(arg)
        if room != state.agent_at:
            raise _fail(Reason.WRONG_LOCATION, f"cannot {verb} {arg}: agent is not at {room}", action)
        if state.accessed != arg:
            raise _fail(Reason.NOT_ACCESSIBLE, f"{_spoken(arg)} is not accessible", action)
        current = state.node_states.get(arg, "closed")
        want, result = ("closed", "open") if verb == "open" else ("open", "closed")
        if current != want:
            raise _fail(Reason.BAD_STATE, f"cannot {verb} {arg}: {arg} is {current}", action)
        new.node_states[arg] = result
        return new

    # turn_on / turn_off
    if node.kind not in ("asset", "object"):
        raise _fail(Reason.WRONG_KIND, f"cannot {verb} {arg}: not an asset or object", action)
    if verb not in node.affordances:
        raise _fail(Reason.NO_AFFORDANCE, f"cannot {verb} {arg}: affordance not available", action)
    if node.kind == "asset":
        room = graph.room_of(arg)
        if room != state.agent_at:
            raise _fail(Reason.WRONG_LOCATION, f"cannot {verb} {arg}: agent is not at {room}", action)
        if state.accessed != arg:
            raise _fail(Reason.NOT_ACCESSIBLE, f"{_spoken(arg)} is not accessible", action)
    else:
        room = _object_room(graph, state, arg)
        if room != state.agent_at:
            raise _fail(Reason.WRONG_LOCATION, f"cannot {verb} {arg}: agent is not at {room}", action)
        if not _object_accessible(graph, state, arg):
            raise _fail(Reason.NOT_ACCESSIBLE, f"{_spoken(arg)} is not accessible", action)
    current = state.node_states.get(arg, "off")
    want, result = ("off", "on") if verb == "turn_on" else ("on", "off")
    if current != want:
        raise _fail(Reason.BAD_STATE, f"cannot {verb} {arg}: {arg} is {current}", action)
    new.node_states[arg] = result
    return new


def _run(state: WorldState, graph: SceneGraph, plan: Sequence[PlanAction]) -> WorldState:
    cur = state
    for i, action in enumerate(plan):
        try:
            cur = apply_action(cur, graph, action)
        except ActionError as err:
            err.index = i
            raise
    return cur


def verify_plan(state: WorldState, graph: SceneGraph, plan: Sequence[PlanAction]) -> VerifyOutcome:
    """Forward-simulate ``plan`` from ``state`` without committing anything."""
    try:
        _run(state, graph, plan)
    except ActionError as err:
        return VerifyOutcome(False, err.index, err.reason, err.feedback)
    return VerifyOutcome(True)


def execute_plan(state: WorldState, graph: SceneGraph, plan: Sequence[PlanAction]) -> WorldState:
    """Run ``plan`` and return the resulting state.

    On failure the :class:`ActionError` carries the failing step index; the
    input state is never modified, so the caller keeps the pre-plan state.
    """
    return _run(state, graph, plan)
