"""Run configuration: flags override the config file, which overrides env vars."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .llm.backends import BackendConfig, ConfigError
from .orchestrator import ModeConfig
from .scene_graph import TokenCounter, approx_tokens

TOKENIZERS: dict[str, TokenCounter] = {
    "chars4": approx_tokens,
    "chars": len,
    "whitespace": lambda text: len(text.split()),
}

# env var -> (section, key, type)
_ENV_VARS = {
    "SGPLAN_BACKEND": ("backend", "kind", str),
    "SGPLAN_ENDPOINT": ("backend", "endpoint", str),
    "SGPLAN_MODEL": ("backend", "model", str),
    "SGPLAN_PROVIDER": ("backend", "provider", str),
    "SGPLAN_MODE": ("mode", "pipeline", str),
    "SGPLAN_MAX_REPLANS": ("mode", "max_replanning_iterations", int),
    "SGPLAN_MAX_SEARCH_STEPS": ("mode", "max_search_steps", int),
    "SGPLAN_TOKENIZER": ("tokenizer", None, str),
}


@dataclass
class Settings:
    backend: BackendConfig = field(default_factory=BackendConfig)
    mode: ModeConfig = field(default_factory=ModeConfig)
    tokenizer: str = "chars4"

    @property
    def counter(self) -> TokenCounter:
        return TOKENIZERS[self.tokenizer]


def read_config_file(path: str | os.PathLike) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return data


def _env_layer(environ: Mapping[str, str]) -> dict:
    out: dict[str, Any] = {}
    for var, (section, key, typ) in _ENV_VARS.items():
        if var not in environ:
            continue
        try:
            value = typ(environ[var])
        except ValueError:
            raise ConfigError(f"{var}={environ[var]!r} is not a valid {typ.__name__}") from None
        if key is None:
            out[section] = value
        else:
            out.setdefault(section, {})[key] = value
    return out


def _merge(*layers: Mapping) -> dict:
    out: dict[str, Any] = {}
    for layer in layers:
        for k, v in layer.items():
            if v is None:
                continue
            if isinstance(v, Mapping) and isinstance(out.get(k), dict):
                out[k] = _merge(out[k], v)
            else:
                out[k] = dict(v) if isinstance(v, Mapping) else v
    return out


def resolve_settings(flags: Mapping | None = None, config_path: str | os.PathLike | None = None,
                     environ: Mapping[str, str] | None = None) -> Settings:
    """Merge the three layers; any invalid value raises :class:`ConfigError`."""
    environ = os.environ if environ is None else environ
    file_layer = read_config_file(config_path) if config_path else {}
    merged = _merge(_env_layer(environ), file_layer, flags or {})
    unknown = set(merged) - {"backend", "mode", "tokenizer"}
    if unknown:
        raise ConfigError(f"unknown config section(s) {sorted(unknown)}")
    tokenizer = merged.get("tokenizer", "chars4")
    if tokenizer not in TOKENIZERS:
        raise ConfigError(f"unknown tokenizer {tokenizer!r} (choose from {', '.join(TOKENIZERS)})")
    try:
        backend = BackendConfig(**merged.get("backend", {}))
        mode = ModeConfig(**merged.get("mode", {}), counter=TOKENIZERS[tokenizer])
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return Settings(backend=backend, mode=mode, tokenizer=tokenizer)
