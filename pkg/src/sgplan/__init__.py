"""Task planning over 3D scene graphs.

A language model searches a collapsed graph for the relevant subgraph, then
drafts plans that a symbolic simulator checks and feeds back on."""

from .orchestrator import ModeConfig, RunResult, run_task
from .path_planner import build_nav_graph, complete_plan, shortest_path
from .scene_graph import SceneGraph, load_graph
from .simulator import PlanAction, WorldState, init_state, parse_plan, verify_plan
from .taxonomy import ErrorClass, classify_failure

__all__ = [
    "ErrorClass", "ModeConfig", "PlanAction", "RunResult", "SceneGraph", "WorldState", "build_nav_graph",
    "classify_failure", "complete_plan", "init_state", "load_graph", "parse_plan", "run_task", "shortest_path",
    "verify_plan",
]
__version__ = "0.1.0"
