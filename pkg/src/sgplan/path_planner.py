"""Navigation over room and pose nodes.

Shortest paths use Dijkstra with the heap keyed on ``(cost, path)``, so among
equal-cost routes the lexicographically smallest node-id sequence wins.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

from .scene_graph import SceneGraph
from .simulator import PlanAction

NAV_KINDS = ("room", "pose")


class Unreachable(Exception):
    def __init__(self, src: str, dst: str):
        self.src, self.dst = src, dst
        super().__init__(f"no path from {src} to {dst}")


class CompletionError(Exception):
    def __init__(self, node: str, reason: str, index: int):
        self.node = node
        self.reason = reason  # "unknown", "not_navigable" or "unreachable"
        self.index = index
        super().__init__(f"cannot plan a route to {node}: {reason.replace('_', ' ')}")


@dataclass(frozen=True)
class NavGraph:
    vertices: tuple[str, ...]
    adj: dict[str, dict[str, float]]

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adj.values()) // 2

    def __contains__(self, node: str) -> bool:
        return node in self.adj


def build_nav_graph(graph: SceneGraph, weighting: str = "unit") -> NavGraph:
    if weighting not in ("unit", "euclidean"):
        raise ValueError(f"unknown weighting {weighting!r}")
    nodes = graph.nodes
    vertices = tuple(nid for nid, n in nodes.items() if n.kind in NAV_KINDS)
    adj: dict[str, dict[str, float]] = {v: {} for v in vertices}
    for a, b in graph.links:
        if a not in adj or b not in adj:
            continue
        kinds = {nodes[a].kind, nodes[b].kind}
        if kinds == {"room"}:
            continue
        w = 1.0
        pa, pb = nodes[a].position, nodes[b].position
        if weighting == "euclidean" and pa is not None and pb is not None:
            w = math.dist(pa, pb)
            if w <= 0:
                raise ValueError(f"zero-length edge {a}-{b}")
        adj[a][b] = w
        adj[b][a] = w
    return NavGraph(vertices, adj)


def shortest_path(nav: NavGraph, src: str, dst: str) -> tuple[list[str], float]:
    """Return ``(path, cost)``; raise :class:`Unreachable` if ``dst`` can't be reached."""
    if src not in nav or dst not in nav:
        raise KeyError(src if src not in nav else dst)
    heap: list[tuple[float, tuple[str, ...]]] = [(0.0, (src,))]
    settled: set[str] = set()
    while heap:
        cost, path = heapq.heappop(heap)
        node = path[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == dst:
            return list(path), cost
        for nbr, w in nav.adj[node].items():
            if nbr not in settled:
                heapq.heappush(heap, (cost + w, path + (nbr,)))
    raise Unreachable(src, dst)


def complete_plan(
    plan: Sequence[PlanAction], graph: SceneGraph, start_at: str, nav: NavGraph | None = None
) -> list[PlanAction]:
    """Expand each ``goto`` into hop-by-hop gotos along the shortest route.

    Every intermediate pose and room on the route is emitted. A goto to the
    current location disappears; other actions pass through untouched.
    """
    nav = nav or build_nav_graph(graph)
    out: list[PlanAction] = []
    here = start_at
    for i, action in enumerate(plan):
        if action.verb != "goto":
            out.append(action)
            continue
        target = action.arg
        if target not in graph.nodes:
            raise CompletionError(target, "unknown", i)
        if target not in nav:
            raise CompletionError(target, "not_navigable", i)
        if target == here:
            continue
        try:
            path, _ = shortest_path(nav, here, target)
        except (Unreachable, KeyError):
            raise CompletionError(target, "unreachable", i) from None
        out.extend(PlanAction("goto", hop) for hop in path[1:])
        here = target
    return out
