import pytest

from sgplan.config import resolve_settings
from sgplan.llm import ConfigError


def test_defaults():
    s = resolve_settings(environ={})
    assert s.backend.kind == "scripted"
    assert s.mode.pipeline == "sayplan" and s.mode.max_replanning_iterations == 5
    assert s.tokenizer == "chars4"


def test_precedence_flags_over_file_over_env(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("mode:\n  pipeline: llm_plus_p\n  max_replanning_iterations: 2\nbackend:\n  model: from-file\n")
    env = {"SGPLAN_MODE": "llm_as_planner", "SGPLAN_MAX_REPLANS": "9", "SGPLAN_MAX_SEARCH_STEPS": "7",
           "SGPLAN_MODEL": "from-env"}
    s = resolve_settings({"mode": {"max_replanning_iterations": 1}}, cfg, env)
    assert s.mode.pipeline == "llm_plus_p"
    assert s.mode.max_replanning_iterations == 1
    assert s.mode.max_search_steps == 7
    assert s.backend.model == "from-file"


def test_json_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"tokenizer": "whitespace"}')
    s = resolve_settings(config_path=cfg, environ={})
    assert s.counter("a b c") == 3


@pytest.mark.parametrize("flags, env", [
    ({"tokenizer": "bpe"}, {}),
    ({"backend": {"kind": "carrier_pigeon"}}, {}),
    ({"mode": {"pipeline": "chaos"}}, {}),
    ({"surprise": 1}, {}),
    ({}, {"SGPLAN_MAX_REPLANS": "many"}),
    ({"mode": {"bogus": 1}}, {}),
])
def test_invalid_settings(flags, env):
    with pytest.raises(ConfigError):
        resolve_settings(flags, environ=env)


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        resolve_settings(config_path=cfg, environ={})


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        resolve_settings(config_path=tmp_path / "nope.yaml", environ={})
