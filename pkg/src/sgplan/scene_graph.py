"""Hierarchical 3D scene graph with a mutable visibility view.

The full graph is fixed after loading. What changes is the *visible* subset
of nodes, which is what gets serialized into prompts. ``collapse`` shows only
the top of the hierarchy; ``expand`` / ``contract`` reveal and hide the
nodes under a floor or room.

Pose and agent nodes sit outside the floor > room > asset > object levels and
are always visible.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

logger = logging.getLogger(__name__)

KINDS = ("floor", "room", "pose", "agent", "asset", "object")
LEVELS = {"floor": 0, "room": 1, "asset": 2, "object": 3}
AFFORDANCES = frozenset({"pickup", "release", "open", "close", "turn_on", "turn_off"})
ASSET_STATES = frozenset({"open", "closed", "on", "off", "free"})
CONTAINMENT_RE = re.compile(r"^(inside_of|ontop_of)\(([^()]+)\)$")

LINK_SEP = "↔"
_LINK_SEPS = (LINK_SEP, "<->")
_NODE_KEYS = ("id", "location", "affordances", "state", "attributes", "position")

TokenCounter = Callable[[str], int]


def approx_tokens(text: str) -> int:
    """Tokenizer-agnostic proxy: one token per four characters."""
    return math.ceil(len(text) / 4)


class GraphError(Exception):
    pass


class GraphParseError(GraphError):
    """Document is not well-formed JSON."""


class GraphSchemaError(GraphError):
    """Document is JSON but does not match the environment schema."""


class GraphInvariantError(GraphError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(v.message for v in violations))


class GraphOpError(GraphError):
    pass


class UnknownNodeError(GraphOpError):
    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"{node_id} does not exist")


@dataclass(frozen=True)
class Violation:
    rule: str
    subject: str
    message: str


@dataclass(frozen=True)
class NodeRecord:
    id: str
    kind: str
    location: str | None = None
    affordances: tuple[str, ...] = ()
    state: str | None = None
    attributes: tuple[str, ...] = ()
    position: tuple[float, float, float] | None = None

    @property
    def level(self) -> int | None:
        return LEVELS.get(self.kind)

    def to_json(self) -> dict:
        out: dict = {"id": self.id}
        if self.location is not None:
            out["location"] = self.location
        if self.affordances:
            out["affordances"] = list(self.affordances)
        if self.state is not None:
            out["state"] = self.state
        if self.attributes:
            out["attributes"] = list(self.attributes)
        if self.position is not None:
            out["position"] = list(self.position)
        return out


@dataclass
class EntityStats:
    counts: dict[str, int]
    visible_counts: dict[str, int]
    edges: int
    full_chars: int
    visible_chars: int
    full_tokens: int
    visible_tokens: int

    @property
    def compression_ratio(self) -> float:
        if self.full_tokens == 0:
            return 0.0
        return 1.0 - self.visible_tokens / self.full_tokens

    @property
    def char_compression_ratio(self) -> float:
        if self.full_chars == 0:
            return 0.0
        return 1.0 - self.visible_chars / self.full_chars

    def to_json(self) -> dict:
        return {
            "counts": dict(self.counts),
            "visible_counts": dict(self.visible_counts),
            "edges": self.edges,
            "full_chars": self.full_chars,
            "visible_chars": self.visible_chars,
            "full_tokens": self.full_tokens,
            "visible_tokens": self.visible_tokens,
            "compression_ratio": round(self.compression_ratio, 6),
        }


def split_link(text: str) -> tuple[str, str]:
    for sep in _LINK_SEPS:
        if sep in text:
            a, _, b = text.partition(sep)
            a, b = a.strip(), b.strip()
            if a and b and not any(s in b for s in _LINK_SEPS):
                return a, b
    raise GraphSchemaError(f"malformed link {text!r}")


class SceneGraph:
    """A loaded environment plus the currently visible view G'.

    Mutating operations (``collapse``, ``expand``, ``contract``) only touch
    the visible/expanded sets; node records and links never change.
    """

    def __init__(self, nodes: Iterable[NodeRecord], links: Iterable[tuple[str, str]]):
        self.nodes: dict[str, NodeRecord] = {}
        self._duplicates: list[str] = []
        for node in nodes:
            if node.id in self.nodes:
                self._duplicates.append(node.id)
                continue
            self.nodes[node.id] = node
        self.links: list[tuple[str, str]] = list(links)
        self.adjacency: dict[str, list[str]] = {nid: [] for nid in self.nodes}
        for a, b in self.links:
            if a in self.adjacency and b in self.adjacency:
                self.adjacency[a].append(b)
                self.adjacency[b].append(a)
        self.parent: dict[str, str] = {}
        self.children: dict[str, list[str]] = {nid: [] for nid in self.nodes}
        self._index_parents()
        self.visible: set[str] = set(self.nodes)
        self.expanded: set[str] = {
            nid for nid, n in self.nodes.items() if n.kind in ("floor", "room")
        }

    # -- construction -------------------------------------------------------

    def _parent_candidates(self, node: NodeRecord) -> list[str]:
        wanted = {"room": ("floor",), "asset": ("room",), "object": ("asset", "room")}
        kinds = wanted.get(node.kind, ())
        return [nb for nb in self.adjacency[node.id] if self.nodes[nb].kind in kinds]

    def _index_parents(self) -> None:
        for nid, node in self.nodes.items():
            cands = self._parent_candidates(node)
            if not cands:
                continue
            # An object's container asset wins over a direct room link.
            cands.sort(key=lambda c: self.nodes[c].kind != "asset")
            self.parent[nid] = cands[0]
            self.children[cands[0]].append(nid)

    def copy(self) -> SceneGraph:
        clone = object.__new__(SceneGraph)
        clone.nodes = self.nodes
        clone._duplicates = self._duplicates
        clone.links = self.links
        clone.adjacency = self.adjacency
        clone.parent = self.parent
        clone.children = self.children
        clone.visible = set(self.visible)
        clone.expanded = set(self.expanded)
        return clone

    # -- queries ------------------------------------------------------------

    def of_kind(self, kind: str) -> list[str]:
        return [nid for nid, n in self.nodes.items() if n.kind == kind]

    @property
    def agent(self) -> NodeRecord:
        agents = self.of_kind("agent")
        if len(agents) != 1:
            raise GraphInvariantError(
                [Violation("agent count", "agent", f"expected one agent, found {len(agents)}")]
            )
        return self.nodes[agents[0]]

    def room_of(self, node_id: str) -> str | None:
        """Room containing an asset or object (following the containment chain)."""
        cur = node_id
        while cur is not None and self.nodes[cur].kind not in ("room", "floor"):
            cur = self.parent.get(cur)
        if cur is not None and self.nodes[cur].kind == "room":
            return cur
        return None

    def descendants(self, node_id: str) -> Iterator[str]:
        stack = list(reversed(self.children[node_id]))
        while stack:
            nid = stack.pop()
            yield nid
            stack.extend(reversed(self.children[nid]))

    def top_kind(self) -> str:
        return "floor" if self.of_kind("floor") else "room"

    # -- visibility ops -----------------------------------------------------

    def collapse(self) -> SceneGraph:
        top = self.top_kind()
        self.visible = {
            nid for nid, n in self.nodes.items() if n.kind in (top, "pose", "agent")
        }
        self.expanded = set()
        return self

    def _check_target(self, node_id: str) -> NodeRecord:
        node = self.nodes.get(node_id)
        if node is None:
            raise UnknownNodeError(node_id)
        if node.kind not in ("floor", "room"):
            raise GraphOpError(f"{node_id} is a {node.kind} node and cannot be expanded or contracted")
        return node

    def expand(self, node_id: str) -> list[str]:
        """Reveal the nodes under a floor or room; return the newly visible ids.

        Expanding a floor shows its rooms. Expanding a room shows its assets
        and every object inside them. An already-expanded node is a no-op.
        """
        node = self._check_target(node_id)
        if node_id not in self.visible:
            raise GraphOpError(f"{node_id} is not visible")
        if node_id in self.expanded:
            logger.info("expand(%s): already expanded", node_id)
            return []
        if node.kind == "floor":
            revealed = list(self.children[node_id])
        else:
            revealed = list(self.descendants(node_id))
        revealed = [nid for nid in revealed if nid not in self.visible]
        self.visible.update(revealed)
        self.expanded.add(node_id)
        return revealed

    def contract(self, node_id: str) -> list[str]:
        """Hide everything below a floor or room; return the hidden ids."""
        self._check_target(node_id)
        if node_id not in self.expanded:
            logger.info("contract(%s): node is not expanded", node_id)
            return []
        hidden = [nid for nid in self.descendants(node_id) if nid in self.visible]
        self.visible.difference_update(hidden)
        self.expanded.discard(node_id)
        self.expanded.difference_update(self.descendants(node_id))
        return hidden

    def is_expanded(self, node_id: str) -> bool:
        return node_id in self.expanded

    # -- serialization ------------------------------------------------------

    def to_document(self, ids: set[str] | None = None) -> dict:
        keep = self.visible if ids is None else ids
        groups: dict[str, list] = {kind: [] for kind in KINDS}
        for nid, node in self.nodes.items():
            if nid in keep:
                groups[node.kind].append(node.to_json())
        links = [f"{a}{LINK_SEP}{b}" for a, b in self.links if a in keep and b in keep]
        return {"nodes": groups, "links": links}

    def serialize_visible(self) -> str:
        return _dumps(self.to_document())

    def serialize_full(self) -> str:
        return _dumps(self.to_document(set(self.nodes)))

    # -- reporting ----------------------------------------------------------

    def stats(self, counter: TokenCounter = approx_tokens) -> EntityStats:
        full = self.serialize_full()
        vis = self.serialize_visible()
        counts = {kind: 0 for kind in KINDS}
        visible_counts = {kind: 0 for kind in KINDS}
        for nid, node in self.nodes.items():
            counts[node.kind] += 1
            if nid in self.visible:
                visible_counts[node.kind] += 1
        return EntityStats(
            counts=counts,
            visible_counts=visible_counts,
            edges=len(self.links),
            full_chars=len(full),
            visible_chars=len(vis),
            full_tokens=counter(full),
            visible_tokens=counter(vis),
        )

    def validate(self) -> list[Violation]:
        return validate(self)


def _dumps(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, separators=(", ", ": "))


# -- loading ----------------------------------------------------------------


def _str_list(value, what: str) -> tuple[str, ...]:
    if isinstance(value, str):
        return (value,)
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise GraphSchemaError(f"{what} must be a list of strings")
    return tuple(value)


def _node_from_json(kind: str, raw) -> NodeRecord:
    if not isinstance(raw, dict):
        raise GraphSchemaError(f"{kind} entry must be an object, got {type(raw).__name__}")
    raw = dict(raw)
    # Some documents name an asset's room under "room".
    if "room" in raw and "location" not in raw:
        raw["location"] = raw.pop("room")
    unknown = set(raw) - set(_NODE_KEYS)
    if unknown:
        raise GraphSchemaError(f"{kind} node has unknown field(s) {sorted(unknown)}")
    nid = raw.get("id")
    if not isinstance(nid, str) or not nid:
        raise GraphSchemaError(f"{kind} node is missing a string id")
    location = raw.get("location")
    if location is not None and not isinstance(location, str):
        raise GraphSchemaError(f"{nid}: location must be a string")
    state = raw.get("state")
    if state is not None and not isinstance(state, str):
        raise GraphSchemaError(f"{nid}: state must be a string")
    position = raw.get("position")
    if position is not None:
        if (
            not isinstance(position, list)
            or len(position) != 3
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in position)
        ):
            raise GraphSchemaError(f"{nid}: position must be a list of three numbers")
        position = tuple(float(c) for c in position)
    return NodeRecord(
        id=nid,
        kind=kind,
        location=location,
        affordances=_str_list(raw.get("affordances", []), f"{nid}: affordances"),
        state=state,
        attributes=_str_list(raw.get("attributes", []), f"{nid}: attributes"),
        position=position,
    )


def graph_from_document(doc) -> SceneGraph:
    if not isinstance(doc, dict):
        raise GraphSchemaError("top level must be an object")
    if set(doc) - {"nodes", "links"}:
        raise GraphSchemaError(f"unknown top-level field(s) {sorted(set(doc) - {'nodes', 'links'})}")
    groups = doc.get("nodes")
    links = doc.get("links")
    if not isinstance(groups, dict):
        raise GraphSchemaError("missing 'nodes' object")
    if not isinstance(links, list):
        raise GraphSchemaError("missing 'links' list")
    nodes = []
    for kind, entries in groups.items():
        if kind not in KINDS:
            raise GraphSchemaError(f"unknown node kind {kind!r}")
        if not isinstance(entries, list):
            raise GraphSchemaError(f"nodes.{kind} must be a list")
        nodes.extend(_node_from_json(kind, raw) for raw in entries)
    pairs = []
    for link in links:
        if not isinstance(link, str):
            raise GraphSchemaError(f"link must be a string, got {link!r}")
        pairs.append(split_link(link))
    return SceneGraph(nodes, pairs)


def load_graph(text: str | bytes, strict: bool = True) -> SceneGraph:
    """Parse an environment document.

    With ``strict`` (the default) any invariant violation raises
    :class:`GraphInvariantError`; otherwise the graph is returned as-is so
    callers can inspect ``validate()``.
    """
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise GraphParseError(f"malformed JSON: {exc}") from exc
    graph = graph_from_document(doc)
    if strict:
        violations = validate(graph)
        if violations:
            raise GraphInvariantError(violations)
    return graph


# -- validation -------------------------------------------------------------


def validate(graph: SceneGraph) -> list[Violation]:
    out: list[Violation] = []
    nodes = graph.nodes

    for nid in graph._duplicates:
        out.append(Violation("duplicate id", nid, f"duplicate node id {nid}"))

    agents = graph.of_kind("agent")
    if len(agents) != 1:
        out.append(Violation("agent count", "agent", f"expected exactly one agent node, found {len(agents)}"))

    seen_links: set[frozenset] = set()
    for a, b in graph.links:
        label = f"{a}{LINK_SEP}{b}"
        missing = [x for x in (a, b) if x not in nodes]
        if missing:
            out.append(Violation("dangling edge", label, f"link {label} references missing node {missing[0]}"))
            continue
        if a == b:
            out.append(Violation("self loop", label, f"link {label} connects a node to itself"))
        key = frozenset((a, b))
        if key in seen_links:
            out.append(Violation("duplicate edge", label, f"link {label} listed twice"))
        seen_links.add(key)
        ka, kb = nodes[a].kind, nodes[b].kind
        la, lb = nodes[a].level, nodes[b].level
        if la is None or lb is None:
            continue
        if abs(la - lb) > 1 and {ka, kb} != {"room", "object"}:
            out.append(Violation("level rule violated", label, f"level rule violated by {label} ({ka}-{kb})"))

    has_floors = bool(graph.of_kind("floor"))
    for nid, node in nodes.items():
        for verb in node.affordances:
            if verb not in AFFORDANCES:
                out.append(Violation("unknown affordance", nid, f"{nid} has unknown affordance {verb!r}"))

        if node.kind in ("asset", "object") or (node.kind == "room" and has_floors):
            parents = graph._parent_candidates(node)
            if not parents:
                wanted = "floor" if node.kind == "room" else "room"
                out.append(Violation("missing parent", nid, f"{nid} is not linked to a parent {wanted}"))
            elif len(parents) > 1:
                out.append(Violation("multiple parents", nid, f"{nid} has multiple parents: {', '.join(parents)}"))
            elif node.kind == "asset" and node.location is not None and node.location != parents[0]:
                out.append(Violation("location mismatch", nid, f"{nid} says location {node.location} but is linked to {parents[0]}"))

        _validate_state(graph, node, out)

        if node.kind in ("agent",):
            loc = node.location
            if loc is None or loc not in nodes or nodes[loc].kind not in ("room", "pose"):
                out.append(Violation("agent location", nid, f"agent location {loc!r} is not a room or pose"))
        elif node.kind == "object" and node.location is not None:
            room = graph.room_of(nid)
            if room is not None and node.location != room:
                out.append(Violation("location mismatch", nid, f"{nid} says location {node.location} but sits in {room}"))
    return out


def _validate_state(graph: SceneGraph, node: NodeRecord, out: list[Violation]) -> None:
    state = node.state
    if state is None:
        return
    nid = node.id
    if node.kind == "asset":
        if state not in ASSET_STATES:
            out.append(Violation("bad state", nid, f"{nid} has invalid asset state {state!r}"))
    elif node.kind == "object":
        if state in ASSET_STATES - {"free"} or state in ("inside_hand", "in_room"):
            return
        m = CONTAINMENT_RE.match(state)
        if not m:
            out.append(Violation("bad state", nid, f"{nid} has invalid object state {state!r}"))
            return
        container = m.group(2)
        if graph.parent.get(nid) != container:
            out.append(Violation("containment mismatch", nid, f"{nid} state {state} disagrees with its links"))
    else:
        out.append(Violation("bad state", nid, f"{node.kind} node {nid} cannot carry a state"))
