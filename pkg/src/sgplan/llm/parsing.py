"""Turn raw model output into an :class:`LlmTurn`.

Models like to wrap JSON in prose or code fences, so the parser scans for the
first decodable JSON object rather than requiring the whole text to be JSON.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from ..simulator import ActionSyntaxError, PlanAction, format_plan, parse_plan

MODES = ("exploring", "planning")
COMMANDS = ("expand_node", "contract_node", "verify_plan", "terminate")

_decoder = json.JSONDecoder()


class ParseErrorKind(str, enum.Enum):
    NO_JSON = "no JSON found"
    MISSING_FIELD = "missing required field"
    BAD_FIELD = "field has the wrong type"
    UNKNOWN_MODE = "unknown mode"
    UNKNOWN_COMMAND = "unknown command"
    INCONSISTENT = "mode and command disagree"
    BAD_ACTION = "malformed action"


class ParseError(ValueError):
    def __init__(self, kind: ParseErrorKind, detail: str = ""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind.value}: {detail}" if detail else kind.value)


@dataclass(frozen=True)
class LlmTurn:
    chain_of_thought: str
    reasoning: str
    mode: str
    command_name: str
    node_name: str | None = None
    plan: tuple[PlanAction, ...] | None = None

    @property
    def ends_search(self) -> bool:
        return self.mode == "planning" or self.command_name == "terminate"

    def to_json(self) -> dict:
        command: dict = {"command_name": self.command_name}
        if self.node_name is not None:
            command["node_name"] = self.node_name
        if self.plan is not None:
            command["plan"] = format_plan(self.plan)
        return {
            "chain_of_thought": self.chain_of_thought,
            "reasoning": self.reasoning,
            "mode": self.mode,
            "command": command,
        }


def _first_object(text: str) -> dict:
    pos = text.find("{")
    while pos != -1:
        try:
            obj, _ = _decoder.raw_decode(text, pos)
        except (ValueError, RecursionError):
            obj = None
        if isinstance(obj, dict):
            return obj
        pos = text.find("{", pos + 1)
    raise ParseError(ParseErrorKind.NO_JSON)


def _require_str(obj: dict, key: str, where: str = "") -> str:
    if key not in obj:
        raise ParseError(ParseErrorKind.MISSING_FIELD, where + key)
    value = obj[key]
    if not isinstance(value, str):
        raise ParseError(ParseErrorKind.BAD_FIELD, f"{where}{key} must be a string")
    return value


def parse_response(text: str | bytes) -> LlmTurn:
    """Parse one model response; raise :class:`ParseError` on anything unusable."""
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", errors="replace")
    if not isinstance(text, str):
        raise ParseError(ParseErrorKind.NO_JSON, f"expected text, got {type(text).__name__}")
    obj = _first_object(text)

    cot = _require_str(obj, "chain_of_thought")
    reasoning = _require_str(obj, "reasoning")
    mode = _require_str(obj, "mode")
    if mode not in MODES:
        raise ParseError(ParseErrorKind.UNKNOWN_MODE, repr(mode))
    if "command" not in obj:
        raise ParseError(ParseErrorKind.MISSING_FIELD, "command")
    command = obj["command"]
    if not isinstance(command, dict):
        raise ParseError(ParseErrorKind.BAD_FIELD, "command must be an object")
    name = _require_str(command, "command_name", "command.")
    if name not in COMMANDS:
        raise ParseError(ParseErrorKind.UNKNOWN_COMMAND, repr(name))

    if name == "terminate":
        return LlmTurn(cot, reasoning, mode, name)
    if name in ("expand_node", "contract_node"):
        if mode != "exploring":
            raise ParseError(ParseErrorKind.INCONSISTENT, f"{name} requires mode exploring")
        node = _require_str(command, "node_name", "command.")
        return LlmTurn(cot, reasoning, mode, name, node_name=node)

    if mode != "planning":
        raise ParseError(ParseErrorKind.INCONSISTENT, "verify_plan requires mode planning")
    if "plan" not in command:
        raise ParseError(ParseErrorKind.MISSING_FIELD, "command.plan")
    raw_plan = command["plan"]
    if not isinstance(raw_plan, (list, str)):
        raise ParseError(ParseErrorKind.BAD_FIELD, "command.plan must be a list of action strings")
    try:
        plan = parse_plan(raw_plan)
    except ActionSyntaxError as exc:
        raise ParseError(ParseErrorKind.BAD_ACTION, str(exc)) from None
    if not plan:
        raise ParseError(ParseErrorKind.BAD_ACTION, "plan is empty")
    node = command.get("node_name")
    return LlmTurn(cot, reasoning, mode, name, node_name=node if isinstance(node, str) else None, plan=tuple(plan))
