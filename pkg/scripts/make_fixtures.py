"""Regenerate the synthetic mini-office and mini-home environments.

Entity counts follow the office (37 rooms, 73 assets, 78 objects) and home
(3 floors, 28 rooms, 52 assets, 60 objects) breakdowns. Output is
deterministic for a fixed seed.

    python scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "sgplan" / "fixtures" / "envs"

ASSET_KINDS = {
    # name: (affordances, initial state)
    "desk": (["release"], "free"),
    "cabinet": (["open", "close", "release"], "closed"),
    "shelf": (["release"], "free"),
    "fridge": (["open", "close", "release"], "closed"),
    "coffee_machine": (["turn_on", "turn_off", "release"], "off"),
    "table": (["release"], "free"),
    "drawer": (["open", "close", "release"], "closed"),
    "microwave": (["open", "close", "turn_on", "turn_off"], "closed"),
    "printer": (["turn_on", "turn_off"], "off"),
    "bin": (["release"], "free"),
    "couch": (["release"], "free"),
    "wardrobe": (["open", "close", "release"], "closed"),
}
OBJECT_KINDS = {
    "mug": ["pickup"],
    "banana": ["pickup"],
    "apple": ["pickup"],
    "stapler": ["pickup"],
    "notebook": ["pickup"],
    "headphones": ["pickup"],
    "drone": ["pickup"],
    "phone": ["pickup"],
    "lamp": ["pickup", "turn_on", "turn_off"],
    "book": ["pickup"],
    "bottle": ["pickup"],
    "chips": ["pickup"],
}
COLOURS = ["red", "blue", "green", "black", "white", "yellow", "grey", "silver"]
MATERIALS = ["wooden", "metal", "plastic", "glass", "ceramic", "fabric"]


def _pos(rng: random.Random, origin: tuple[float, float]) -> list[float]:
    return [round(origin[0] + rng.uniform(-2, 2), 2), round(origin[1] + rng.uniform(-2, 2), 2),
            round(rng.uniform(0.0, 1.8), 2)]


def build(seed: int, room_names: list[str], floors: list[list[int]] | None, n_assets: int, n_objects: int,
          agent_room: int) -> dict:
    rng = random.Random(seed)
    nodes: dict[str, list] = {"floor": [], "room": [], "pose": [], "agent": [], "asset": [], "object": []}
    links: list[str] = []
    origins = {}
    for i, name in enumerate(room_names):
        origins[name] = (round(4.0 * (i % 8), 2), round(5.0 * (i // 8), 2))
        nodes["room"].append({"id": name, "attributes": [rng.choice(["carpet", "tiles", "timber"])]})
    if floors:
        for f, members in enumerate(floors):
            fid = f"floor{f + 1}"
            nodes["floor"].append({"id": fid})
            for idx in members:
                links.append(f"{fid}↔{room_names[idx]}")

    # Rooms hang off a corridor of poses; consecutive corridor poses are linked.
    pose_ids = []
    groups = floors or [list(range(len(room_names)))]
    for members in groups:
        prev = None
        for idx in members:
            room = room_names[idx]
            pid = f"pose{len(pose_ids) + 1}"
            pose_ids.append(pid)
            ox, oy = origins[room]
            nodes["pose"].append({"id": pid, "position": [ox, round(oy - 2.5, 2), 0.0]})
            links.append(f"{room}↔{pid}")
            if prev is not None:
                links.append(f"{prev}↔{pid}")
            prev = pid
    if floors:
        # stairs: the first corridor pose on each floor links to the next floor's
        firsts = [pose_ids[sum(len(g) for g in floors[:k])] for k in range(len(floors))]
        for a, b in zip(firsts, firsts[1:]):
            links.append(f"{a}↔{b}")

    nodes["agent"].append({"id": "agent", "location": room_names[agent_room]})
    links.append(f"{room_names[agent_room]}↔agent")

    counters: dict[str, int] = {}
    assets = []
    for k in range(n_assets):
        room = room_names[k % len(room_names)] if k < len(room_names) else rng.choice(room_names)
        kind = rng.choice(sorted(ASSET_KINDS))
        counters[kind] = counters.get(kind, 0) + 1
        aid = f"{kind}{counters[kind]}"
        aff, state = ASSET_KINDS[kind]
        nodes["asset"].append({
            "id": aid, "location": room, "affordances": list(aff), "state": state,
            "attributes": [rng.choice(COLOURS), rng.choice(MATERIALS)], "position": _pos(rng, origins[room]),
        })
        links.append(f"{room}↔{aid}")
        assets.append((aid, room, aff))

    for k in range(n_objects):
        kind = rng.choice(sorted(OBJECT_KINDS))
        counters[kind] = counters.get(kind, 0) + 1
        oid = f"{kind}{counters[kind]}"
        node = {"id": oid, "affordances": list(OBJECT_KINDS[kind])}
        if rng.random() < 0.15:
            room = rng.choice(room_names)
            links.append(f"{room}↔{oid}")
        else:
            candidates = [a for a in assets if "release" in a[2] or "open" in a[2]]
            aid, room, aff = rng.choice(candidates)
            node["state"] = f"inside_of({aid})" if "open" in aff else f"ontop_of({aid})"
            links.append(f"{aid}↔{oid}")
        node["attributes"] = [rng.choice(COLOURS)]
        node["position"] = _pos(rng, origins[room])
        nodes["object"].append(node)
    return {"nodes": {k: v for k, v in nodes.items() if v}, "links": links}


OFFICE_ROOMS = (
    ["kitchen", "cafeteria", "printing_zone", "presentation_lounge", "meeting_room1", "meeting_room2",
     "meeting_room3", "mobile_robotics_lab", "manipulation_lab", "supplies_station", "admin", "lobby",
     "gym", "generator_room", "bathroom1", "bathroom2"]
    + [f"{name}_office" for name in ("niko", "will", "jason", "filipe", "tobi", "peter", "chris", "michael",
                                      "dimity", "lauren", "ajay", "aaron", "wayne", "rohan", "krishan", "jesse",
                                      "sourav", "jad", "ian", "nicole", "tom")]
)
HOME_ROOMS = [
    "kitchen", "dining_room", "living_room", "laundry", "garage", "entrance", "pantry", "guest_bathroom",
    "study", "playroom",
    "master_bedroom", "ensuite", "kids_room1", "kids_room2", "bathroom", "hallway_storage", "office",
    "reading_nook", "balcony",
    "attic", "gym", "home_theatre", "guest_room1", "guest_room2", "storage_room", "music_room", "workshop",
    "sunroom",
]


def main() -> None:
    assert len(OFFICE_ROOMS) == 37 and len(HOME_ROOMS) == 28
    office = build(seed=7, room_names=OFFICE_ROOMS, floors=None, n_assets=73, n_objects=78, agent_room=11)
    home = build(seed=11, room_names=HOME_ROOMS, floors=[list(range(10)), list(range(10, 19)), list(range(19, 28))],
                 n_assets=52, n_objects=60, agent_room=5)
    for name, doc in (("mini_office.json", office), ("mini_home.json", home)):
        (OUT / name).write_text(json.dumps(doc, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
        print(name, {k: len(v) for k, v in doc["nodes"].items()}, "links", len(doc["links"]))


if __name__ == "__main__":
    main()
