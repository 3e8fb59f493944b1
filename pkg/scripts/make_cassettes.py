"""Regenerate the shipped cassettes.

Each cassette is produced by running the pipeline with a scripted list of
responses behind a RecordingBackend, so the request hashes match the prompts
the engine actually sends.

    python scripts/make_cassettes.py
"""

from __future__ import annotations

import json
from pathlib import Path

from sgplan.fixtures import load_env
from sgplan.llm import RecordingBackend, ScriptedBackend
from sgplan.orchestrator import ModeConfig, run_task

OUT = Path(__file__).resolve().parents[1] / "src" / "sgplan" / "fixtures" / "cassettes"
COFFEE = "make a coffee for Tom and place it in his room"


def explore(cot, reasoning, command, node):
    return json.dumps({
        "chain_of_thought": cot,
        "reasoning": reasoning,
        "mode": "exploring",
        "command": {"command_name": command, "node_name": node},
    })


def planning(cot, reasoning, plan):
    return json.dumps({
        "chain_of_thought": cot,
        "reasoning": reasoning,
        "mode": "planning",
        "command": {"command_name": "verify_plan", "plan": plan},
    })


SEARCH_COFFEE = [
    explore("need a mug, a coffee machine and a spot in tom's room -> start with the likely rooms -> toms room "
            "first, kitchen next", "expand toms room", "expand_node", "toms_room"),
    explore("tom's room has a wardrobe to put the coffee on -> no mug or machine here -> try the kitchen",
            "expand the kitchen", "expand_node", "kitchen"),
    explore("kitchen has the coffee machine but no mug -> jacks room, bobs room and the living room are still "
            "collapsed -> try jacks room", "expand jacks room", "expand_node", "jacks_room"),
    explore("nothing useful in jacks room -> hide it to keep the graph small -> keep looking for the mug",
            "contract jacks room", "contract_node", "jacks_room"),
    explore("still missing the mug -> bobs room is unexplored", "expand bobs room", "expand_node", "bobs_room"),
]

PLAN_FIRST = ["goto(bobs_room)", "access(wardrobe1)", "pickup(coffee_mug)", "goto(kitchen)", "access(coffee_machine)",
           "release(coffee_mug)", "turn_on(coffee_machine)", "turn_off(coffee_machine)", "pickup(coffee_mug)",
           "goto(toms_room)", "access(wardrobe2)", "release(coffee_mug)", "done"]
PLAN_FIXED = PLAN_FIRST[:2] + ["open(wardrobe1)"] + PLAN_FIRST[2:]

PLANNING_COFFEE = [
    planning("mug found in bobs wardrobe, machine in the kitchen, target wardrobe in toms room -> switch to "
             "planning -> fetch mug, brew, deliver", "write the plan from the visible subgraph", PLAN_FIRST),
    planning("the mug sits in a closed wardrobe -> open the wardrobe before picking it up -> rest of the plan "
             "unchanged", "fix the plan using the simulator feedback", PLAN_FIXED),
]

SEARCH_KITCHEN = [
    explore("the coffee machine is most likely in the kitchen", "i will expand the kitchen", "expand_node",
            "kitchen"),
]
PLAN_NO_POSES = ["goto(kitchen)", "access(coffee_machine)", "turn_on(coffee_machine)", "done"]
PLAN_BROKEN_ALWAYS = ["goto(kitchen)", "access(coffee_machine)", "open(coffee_machine)", "done"]


def record(name: str, responses: list[str], env: str = "demo-home", instruction: str = COFFEE,
           pipeline: str = "sayplan", required=None) -> None:
    path = OUT / f"{name}.jsonl"
    path.unlink(missing_ok=True)
    backend = RecordingBackend(ScriptedBackend(responses), path)
    result = run_task(load_env(env), instruction, backend, ModeConfig(pipeline=pipeline), required)
    used = backend.inner.cursor
    assert used == len(responses), f"{name}: used {used} of {len(responses)} responses"
    print(f"{name}: {result.outcome} {result.error_class and result.error_class.value} ({used} responses)")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    record("coffee_replan", SEARCH_COFFEE + PLANNING_COFFEE)
    record("coffee_search", SEARCH_COFFEE + [PLANNING_COFFEE[0]], pipeline="llm_plus_p")

    no_pose = SEARCH_KITCHEN + [planning("make coffee", "turn the machine on", PLAN_NO_POSES)]
    record("coffee_no_poses", no_pose, instruction="turn on the coffee machine")
    record("always_broken", SEARCH_KITCHEN + [planning("make coffee", "open the machine", PLAN_BROKEN_ALWAYS)] * 6,
           instruction="turn on the coffee machine")

    # Adversarial fixtures, one per error class.
    record("adv_missing_action", SEARCH_COFFEE + [PLANNING_COFFEE[0]], pipeline="llm_plus_p")
    record("adv_missing_pose", no_pose, instruction="turn on the coffee machine", pipeline="llm_as_planner")
    record("adv_wrong_action",
           SEARCH_KITCHEN + [planning("open the machine", "open it", PLAN_BROKEN_ALWAYS)],
           instruction="turn on the coffee machine", pipeline="llm_plus_p")
    record("adv_incomplete_search",
           SEARCH_COFFEE[:2] + [planning("the mug must be in the kitchen", "plan now",
                                    ["goto(kitchen)", "pickup(coffee_mug)", "done"])],
           pipeline="llm_plus_p", required=["coffee_mug"])
    record("adv_hallucinated",
           SEARCH_KITCHEN + [planning("go to the pose near the machine", "plan now",
                                      ["goto(pose9)", "access(coffee_machine)", "turn_on(coffee_machine)", "done"])],
           instruction="turn on the coffee machine", pipeline="llm_as_planner")


if __name__ == "__main__":
    main()
