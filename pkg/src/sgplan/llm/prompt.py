"""Prompt assembly.

The first six sections are static: they are rendered once from
``static_prompt.json`` and never change within a session. The last four carry
the per-step instruction, visible graph, memory list and simulator feedback.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Sequence

STATIC_SECTIONS = (
    "agent_role",
    "environment_functions",
    "environment_state",
    "environment_api",
    "output_response_format",
    "examples",
)
DYNAMIC_SECTIONS = ("instruction", "scene_graph_json", "memory", "feedback")

HEADERS = {
    "agent_role": "Agent Role:",
    "environment_functions": "Environment Functions:",
    "environment_state": "Environment State:",
    "environment_api": "Environment API:",
    "output_response_format": "Output Response Format:",
    "examples": "Example:",
    "instruction": "Instruction:",
    "scene_graph_json": "3D Scene Graph:",
    "memory": "Memory:",
    "feedback": "Feedback:",
}


def render_memory(memory: Sequence[str]) -> str:
    return "[" + ", ".join(memory) + "]"


def _bullets(lines: Sequence[str]) -> str:
    return "\n".join(f"- {line}" for line in lines)


def _render_example(ex: dict) -> str:
    parts = [f"Instruction: {ex['instruction']}", f"Memory: {render_memory(ex['memory'])}"]
    if ex.get("feedback"):
        parts.append(f"Feedback: {ex['feedback']}")
    parts.append("Response: " + json.dumps(ex["response"], ensure_ascii=False))
    return "\n".join(parts)


@lru_cache(maxsize=None)
def static_sections() -> tuple[tuple[str, str], ...]:
    raw = json.loads(resources.files("sgplan.llm").joinpath("static_prompt.json").read_text("utf-8"))
    bodies = {
        "agent_role": raw["agent_role"],
        "environment_functions": _bullets(raw["environment_functions"]),
        "environment_state": _bullets(raw["environment_state"]),
        "environment_api": _bullets(raw["environment_api"]),
        "output_response_format": _bullets(raw["output_response_format"]),
        "examples": "\n\n".join(_render_example(ex) for ex in raw["examples"]),
    }
    return tuple((name, bodies[name]) for name in STATIC_SECTIONS)


def _render_section(name: str, body: str) -> str:
    header = HEADERS[name]
    if not body:
        return header
    sep = "\n" if "\n" in body else " "
    return f"{header}{sep}{body}"


@dataclass(frozen=True)
class PromptDocument:
    sections: tuple[tuple[str, str], ...]

    def section(self, name: str) -> str:
        return dict(self.sections)[name]

    @property
    def system_text(self) -> str:
        return "\n\n".join(_render_section(n, b) for n, b in self.sections if n in STATIC_SECTIONS)

    @property
    def user_text(self) -> str:
        return "\n\n".join(_render_section(n, b) for n, b in self.sections if n in DYNAMIC_SECTIONS)

    @property
    def text(self) -> str:
        return self.system_text + "\n\n" + self.user_text

    def digest(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()


def build_prompt(instruction: str, graph_json: str, memory: Sequence[str] = (), feedback: str = "") -> PromptDocument:
    dynamic = (
        ("instruction", instruction),
        ("scene_graph_json", graph_json),
        ("memory", render_memory(memory)),
        ("feedback", feedback or ""),
    )
    return PromptDocument(static_sections() + dynamic)
