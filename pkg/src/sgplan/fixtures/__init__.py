"""Environments and scripted model runs that ship with the package.

``demo-home`` is the five-room apartment used in the worked search and
replanning examples. Its link list is the replanning-example version
(``jacks_room↔pose1``, not ``toms_room↔pose1``), and its coffee machine also
affords ``release`` so the mug can be set down on it.

``mini-office`` and ``mini-home`` are synthetic, generated by
``scripts/make_fixtures.py``: a 37-room single-floor office and a 3-floor
28-room home with pose-linked rooms and objects nested in assets.
"""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from ..scene_graph import SceneGraph, load_graph

ENVIRONMENTS = {
    "demo-home": "demo_home.json",
    "mini-office": "mini_office.json",
    "mini-home": "mini_home.json",
}


def _root() -> Path:
    return Path(str(resources.files("sgplan.fixtures")))


def env_path(name_or_path: str | os.PathLike) -> Path:
    """Resolve a builtin environment name, falling back to a filesystem path."""
    key = str(name_or_path)
    if key in ENVIRONMENTS:
        return _root() / "envs" / ENVIRONMENTS[key]
    return Path(name_or_path)


def load_env(name_or_path: str | os.PathLike) -> SceneGraph:
    return load_graph(env_path(name_or_path).read_text(encoding="utf-8"))


def cassette_path(name: str) -> Path:
    return _root() / "cassettes" / f"{name}.jsonl"


def suite_path(name: str) -> Path:
    return _root() / "suites" / f"{name}.json"
