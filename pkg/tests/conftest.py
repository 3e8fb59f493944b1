import json

import pytest

from sgplan.fixtures import ENVIRONMENTS, load_env

COFFEE = "make a coffee for Tom and place it in his room"


@pytest.fixture
def demo():
    return load_env("demo-home")


@pytest.fixture(params=sorted(ENVIRONMENTS))
def any_env(request):
    return load_env(request.param)


def make_doc(nodes=None, links=None):
    """Tiny valid environment; callers patch pieces of it."""
    base = {
        "room": [{"id": "r1"}, {"id": "r2"}],
        "pose": [{"id": "p1"}],
        "agent": [{"id": "agent", "location": "r1"}],
        "asset": [{"id": "box", "location": "r1", "affordances": ["open", "close", "release"], "state": "closed"}],
        "object": [{"id": "ball", "affordances": ["pickup"], "state": "inside_of(box)"}],
    }
    base.update(nodes or {})
    return {
        "nodes": base,
        "links": links if links is not None else ["r1↔p1", "r2↔p1", "r1↔agent", "r1↔box", "box↔ball"],
    }


def doc_text(doc):
    return json.dumps(doc, ensure_ascii=False)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance_log.LINES, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
