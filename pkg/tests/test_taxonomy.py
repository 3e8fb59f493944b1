import pytest

from sgplan.simulator import VerifyOutcome, init_state, parse_plan, verify_plan
from sgplan.taxonomy import ErrorClass, classify_failure, single_insertion_repair


def _classify(graph, plan, visible=None, required=None):
    plan = parse_plan(plan)
    out = verify_plan(init_state(graph), graph, plan)
    assert not out.ok
    return classify_failure(plan, graph, visible if visible is not None else set(graph.nodes), out,
                            required_nodes=required)


def test_class_names():
    assert [c.value for c in ErrorClass] == ["Missing Action", "Missing Pose", "Wrong Action",
                                             "Incomplete Search", "Hallucinated Nodes"]


def test_missing_action(demo):
    plan = ["access(wardrobe1)", "pickup(coffee_mug)", "done"]
    assert _classify(demo, plan) is ErrorClass.MISSING_ACTION
    cand = single_insertion_repair(parse_plan(plan), demo, init_state(demo), 1)
    assert str(cand) == "open(wardrobe1)"


def test_missing_pose(demo):
    assert _classify(demo, ["goto(kitchen)", "done"]) is ErrorClass.MISSING_POSE


def test_wrong_action(demo):
    plan = ["goto(pose1)", "goto(jacks_room)", "goto(pose3)", "goto(kitchen)", "access(coffee_machine)",
            "open(coffee_machine)"]
    assert _classify(demo, plan) is ErrorClass.WRONG_ACTION


def test_incomplete_search(demo):
    visible = set(demo.copy().collapse().visible)
    assert _classify(demo, ["access(wardrobe1)", "pickup(coffee_mug)"], visible, ["coffee_mug"]) \
        is ErrorClass.INCOMPLETE_SEARCH


def test_hallucinated_unknown_node(demo):
    assert _classify(demo, ["goto(pose9)"]) is ErrorClass.HALLUCINATED_NODES


def test_hallucinated_invisible_node(demo):
    visible = set(demo.copy().collapse().visible)
    assert _classify(demo, ["access(wardrobe1)", "pickup(coffee_mug)"], visible) is ErrorClass.HALLUCINATED_NODES


def test_success_cannot_be_classified(demo):
    with pytest.raises(ValueError):
        classify_failure([], demo, set(), VerifyOutcome(True))
