import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgplan.fixtures import load_env
from sgplan.scene_graph import (
    GraphInvariantError,
    GraphOpError,
    GraphParseError,
    GraphSchemaError,
    UnknownNodeError,
    approx_tokens,
    load_graph,
)

from conftest import doc_text, make_doc


def test_loads_demo_home(demo):
    assert len(demo.nodes) == 18
    assert len(demo.links) == 18
    assert demo.parent["coffee_mug"] == "wardrobe1"
    assert demo.room_of("coffee_mug") == "bobs_room"
    assert demo.agent.location == "bobs_room"


def test_ascii_link_separator_accepted():
    doc = make_doc(links=["r1<->p1", "r2<->p1", "r1<->agent", "r1<->box", "box<->ball"])
    g = load_graph(doc_text(doc))
    assert "r1↔p1" in g.serialize_full()
    assert "<->" not in g.serialize_full()


def test_bad_json_is_parse_error():
    with pytest.raises(GraphParseError):
        load_graph("{not json")


def test_unknown_node_key_is_schema_error():
    doc = make_doc(nodes={"pose": [{"id": "p1", "colour": "red"}]})
    with pytest.raises(GraphSchemaError):
        load_graph(doc_text(doc))


@pytest.mark.parametrize(
    "patch, links, rule",
    [
        ({"pose": [{"id": "p1"}, {"id": "p1"}]}, None, "duplicate id"),
        (None, ["r1↔p1", "r2↔p1", "r1↔agent", "r1↔box", "box↔ball", "r1↔ghost"], "dangling edge"),
        (None, ["r1↔p1", "r2↔p1", "r1↔agent", "r1↔box", "box↔ball", "p1↔p1"], "self loop"),
        (None, ["r1↔p1", "r2↔p1", "r1↔agent", "r1↔box", "box↔ball", "p1↔r1"], "duplicate edge"),
        ({"agent": []}, ["r1↔p1", "r2↔p1", "r1↔box", "box↔ball"], "agent count"),
        ({"asset": [{"id": "box", "location": "r1", "affordances": ["fly"], "state": "closed"}]}, None,
         "unknown affordance"),
        ({"asset": [{"id": "box", "location": "r2", "affordances": ["open"], "state": "closed"}]}, None,
         "location mismatch"),
        ({"asset": [{"id": "box", "location": "r1", "affordances": ["open"], "state": "sideways"}]}, None,
         "bad state"),
    ],
)
def test_validation_rules(patch, links, rule):
    g = load_graph(doc_text(make_doc(patch, links)), strict=False)
    assert rule in {v.rule for v in g.validate()}
    with pytest.raises(GraphInvariantError):
        load_graph(doc_text(make_doc(patch, links)))


def test_level_rule_rejects_floor_to_asset():
    doc = make_doc(nodes={"floor": [{"id": "f1"}]},
                   links=["f1↔r1", "f1↔r2", "r1↔p1", "r2↔p1", "r1↔agent", "r1↔box", "box↔ball", "f1↔box"])
    g = load_graph(doc_text(doc), strict=False)
    assert "level rule violated" in {v.rule for v in g.validate()}


def test_room_to_object_link_is_allowed():
    doc = make_doc(nodes={"object": [{"id": "ball", "affordances": ["pickup"]}]},
                   links=["r1↔p1", "r2↔p1", "r1↔agent", "r1↔box", "r2↔ball"])
    g = load_graph(doc_text(doc))
    assert g.room_of("ball") == "r2"


def test_fixtures_validate(any_env):
    assert any_env.validate() == []


def test_collapse_shows_top_level_pose_and_agent(demo):
    demo.collapse()
    kinds = {demo.nodes[n].kind for n in demo.visible}
    assert kinds == {"room", "pose", "agent"}
    hidden = set(demo.nodes) - demo.visible
    assert hidden == {"bed1", "bed2", "wardrobe1", "wardrobe2", "fridge", "coffee_machine", "coffee_mug"}


def test_collapse_multi_floor_shows_floors_only():
    g = load_env("mini-home").collapse()
    kinds = {g.nodes[n].kind for n in g.visible}
    assert kinds == {"floor", "pose", "agent"}
    rooms = g.expand("floor2")
    assert rooms and all(g.nodes[r].kind == "room" for r in rooms)
    assert not g.is_expanded(rooms[0])
    assets = g.expand(rooms[0])
    assert assets


def test_expand_reveals_nested_objects(demo):
    demo.collapse()
    revealed = demo.expand("bobs_room")
    assert set(revealed) == {"bed1", "wardrobe1", "coffee_mug"}
    assert demo.expand("bobs_room") == []


def test_expand_errors(demo):
    demo.collapse()
    with pytest.raises(UnknownNodeError, match="ghost does not exist"):
        demo.expand("ghost")
    with pytest.raises(GraphOpError):
        demo.expand("pose1")


def test_contract_restores_collapsed_view(demo):
    demo.collapse()
    before = demo.serialize_visible()
    demo.expand("kitchen")
    assert len(demo.serialize_visible()) > len(before)
    hidden = demo.contract("kitchen")
    assert set(hidden) == {"fridge", "coffee_machine"}
    assert demo.serialize_visible() == before
    assert demo.contract("kitchen") == []


def test_copy_isolates_visibility(demo):
    clone = demo.copy().collapse()
    assert len(clone.visible) < len(demo.visible)


def test_serialization_is_canonical(demo):
    text = demo.serialize_full()
    doc = json.loads(text)
    assert list(doc["nodes"]) == ["floor", "room", "pose", "agent", "asset", "object"]
    assert list(doc["nodes"]["asset"][0]) == ["id", "location", "affordances", "state"]
    assert doc["links"][0] == "bobs_room↔pose1"
    assert load_graph(text).serialize_full() == text


def test_stats_compression(demo):
    full = demo.stats()
    assert full.compression_ratio == 0
    demo.collapse()
    st_ = demo.stats()
    assert st_.counts["asset"] == 6 and st_.visible_counts["asset"] == 0
    assert 0 < st_.compression_ratio < 1
    assert st_.full_tokens == approx_tokens(demo.serialize_full())


def test_approx_tokens():
    assert approx_tokens("") == 0
    assert approx_tokens("abcd") == 1
    assert approx_tokens("abcde") == 2


ops = st.lists(st.tuples(st.sampled_from(["expand", "contract"]),
                         st.sampled_from(["bobs_room", "toms_room", "kitchen", "jacks_room", "livingroom"])),
               max_size=15)


@settings(max_examples=200, deadline=None)
@given(ops)
def test_visibility_ops_keep_top_level_and_close_over_parents(seq):
    g = load_env("demo-home").collapse()
    base = set(g.visible)
    for op, node in seq:
        getattr(g, op)(node)
        assert base <= g.visible
        # every visible asset/object has its parent visible
        for nid in g.visible:
            parent = g.parent.get(nid)
            if parent is not None:
                assert parent in g.visible
    for node in ["bobs_room", "toms_room", "kitchen", "jacks_room", "livingroom"]:
        g.contract(node)
    assert g.visible == base
