import pytest

from sgplan.fixtures import load_env
from sgplan.path_planner import (
    CompletionError,
    NavGraph,
    Unreachable,
    build_nav_graph,
    complete_plan,
    shortest_path,
)
from sgplan.simulator import format_plan, init_state, parse_plan, verify_plan

from bfs_oracle import bfs_all, nav_edges


def test_demo_nav_graph(demo):
    nav = build_nav_graph(demo)
    assert set(nav.vertices) == {"bobs_room", "toms_room", "jacks_room", "kitchen", "livingroom",
                                 "pose1", "pose2", "pose3", "pose4", "pose5"}
    # 18 links minus agent, 6 asset links and the mug link
    assert nav.edge_count == 10


def test_demo_route_matches_bfs(demo):
    nav = build_nav_graph(demo)
    path, cost = shortest_path(nav, "kitchen", "bobs_room")
    assert path == ["kitchen", "pose3", "jacks_room", "pose1", "bobs_room"]
    assert cost == 4 == bfs_all(nav_edges(demo), "kitchen")["bobs_room"]


def test_all_pairs_match_bfs(any_env):
    nav = build_nav_graph(any_env)
    adj = nav_edges(any_env)
    for src in nav.vertices:
        oracle = bfs_all(adj, src)
        for dst in nav.vertices:
            if dst in oracle:
                path, cost = shortest_path(nav, src, dst)
                assert cost == oracle[dst]
                assert len(path) == oracle[dst] + 1
                assert all(b in adj[a] for a, b in zip(path, path[1:]))
            else:
                with pytest.raises(Unreachable):
                    shortest_path(nav, src, dst)


def test_ties_break_lexicographically():
    nav = NavGraph(("a", "b", "c", "d"), {"a": {"c": 1.0, "b": 1.0}, "b": {"a": 1.0, "d": 1.0},
                                          "c": {"a": 1.0, "d": 1.0}, "d": {"b": 1.0, "c": 1.0}})
    assert shortest_path(nav, "a", "d") == (["a", "b", "d"], 2.0)


def test_euclidean_weighting_uses_positions():
    g = load_env("mini-office")
    nav = build_nav_graph(g, weighting="euclidean")
    _, cost = shortest_path(nav, "pose1", "pose3")
    assert cost > 0 and cost != 2.0


def test_complete_plan_inserts_intermediate_hops(demo):
    raw = parse_plan(["goto(bobs_room)", "access(wardrobe1)", "goto(kitchen)", "done"])
    full = complete_plan(raw, demo, "bobs_room")
    assert format_plan(full) == ["access(wardrobe1)", "goto(pose1)", "goto(jacks_room)", "goto(pose3)",
                                 "goto(kitchen)", "done"]


def test_completed_gotos_verify(demo):
    raw = parse_plan(["goto(livingroom)", "goto(toms_room)", "goto(bobs_room)"])
    full = complete_plan(raw, demo, "bobs_room")
    assert verify_plan(init_state(demo), demo, full).ok


@pytest.mark.parametrize("target, reason", [("ghost", "unknown"), ("bed1", "not_navigable")])
def test_completion_errors(demo, target, reason):
    with pytest.raises(CompletionError) as info:
        complete_plan(parse_plan(["done", f"goto({target})"]), demo, "bobs_room")
    assert info.value.reason == reason and info.value.index == 1
