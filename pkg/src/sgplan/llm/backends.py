"""Model backends. The remote one talks to a chat endpoint; the scripted one replays a cassette.

Cassettes are JSON-lines files, one ``{"request_hash": ..., "response": ...}``
object per model call. The scripted backend replays them in order.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol

import httpx

from .prompt import PromptDocument

logger = logging.getLogger(__name__)

DEFAULT_API_KEY_ENV = "SGPLAN_API_KEY"
_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class BackendError(Exception):
    pass


class ScriptExhausted(BackendError):
    pass


class TransportFailure(BackendError):
    pass


class ResponseTooLarge(BackendError):
    pass


class ConfigError(BackendError):
    pass


class Backend(Protocol):
    def complete(self, prompt: PromptDocument) -> str: ...


@dataclass
class BackendConfig:
    kind: str = "scripted"
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4"
    provider: str = "openai"
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout: float = 60.0
    retries: int = 3
    backoff_base: float = 1.0
    api_key_env: str = DEFAULT_API_KEY_ENV
    max_response_chars: int = 200_000
    cassette: str | None = None
    record_to: str | None = None
    script: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("remote", "scripted"):
            raise ConfigError(f"unknown backend {self.kind!r} (expected remote or scripted)")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.retries < 0:
            raise ConfigError("retries must be >= 0")


# -- scripted ---------------------------------------------------------------


def read_cassette(path: str | os.PathLike) -> list[str]:
    responses = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read cassette {path}: {exc.strerror or exc}") from None
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
            responses.append(entry["response"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad cassette entry ({exc})") from None
    return responses


class ScriptedBackend:
    """Return canned responses in order; raise once the script runs out."""

    def __init__(self, responses: Iterable[str]):
        self.responses = list(responses)
        self.cursor = 0

    @classmethod
    def from_cassette(cls, path: str | os.PathLike) -> ScriptedBackend:
        return cls(read_cassette(path))

    def complete(self, prompt: PromptDocument) -> str:
        if self.cursor >= len(self.responses):
            raise ScriptExhausted(f"script exhausted after {len(self.responses)} responses")
        text = self.responses[self.cursor]
        self.cursor += 1
        return text


class RecordingBackend:
    """Wrap another backend and append every exchange to a cassette file."""

    def __init__(self, inner: Backend, path: str | os.PathLike):
        self.inner = inner
        self.path = Path(path)

    def complete(self, prompt: PromptDocument) -> str:
        text = self.inner.complete(prompt)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps({"request_hash": prompt.digest(), "response": text}, ensure_ascii=False) + "\n")
        return text


# -- remote -----------------------------------------------------------------


def _openai_request(cfg: BackendConfig, prompt: PromptDocument, key: str | None):
    headers = {"Content-Type": "application/json"}
    if key:
        headers["Authorization"] = f"Bearer {key}"
    body = {
        "model": cfg.model,
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
        "messages": [
            {"role": "system", "content": prompt.system_text},
            {"role": "user", "content": prompt.user_text},
        ],
    }
    return headers, body


def _openai_extract(payload: dict) -> str:
    return payload["choices"][0]["message"]["content"]


def _anthropic_request(cfg: BackendConfig, prompt: PromptDocument, key: str | None):
    headers = {"Content-Type": "application/json", "anthropic-version": "2023-06-01"}
    if key:
        headers["x-api-key"] = key
    body = {
        "model": cfg.model,
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
        "system": prompt.system_text,
        "messages": [{"role": "user", "content": prompt.user_text}],
    }
    return headers, body


def _anthropic_extract(payload: dict) -> str:
    return "".join(block.get("text", "") for block in payload["content"])


PROVIDERS: dict[str, tuple[Callable, Callable]] = {
    "openai": (_openai_request, _openai_extract),
    "anthropic": (_anthropic_request, _anthropic_extract),
}


class RemoteBackend:
    """Blocking chat-completion client with bounded exponential backoff."""

    def __init__(self, config: BackendConfig, transport: httpx.BaseTransport | None = None, sleep=time.sleep):
        if config.provider not in PROVIDERS:
            raise ConfigError(f"unknown provider {config.provider!r}")
        self.config = config
        self._build, self._extract = PROVIDERS[config.provider]
        self._client = httpx.Client(timeout=config.timeout, transport=transport)
        self._sleep = sleep
        self.attempts = 0

    def complete(self, prompt: PromptDocument) -> str:
        cfg = self.config
        headers, body = self._build(cfg, prompt, os.environ.get(cfg.api_key_env))
        last: str = ""
        for attempt in range(cfg.retries + 1):
            if attempt:
                self._sleep(cfg.backoff_base * 2 ** (attempt - 1))
            self.attempts += 1
            try:
                resp = self._client.post(cfg.endpoint, headers=headers, json=body)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
                logger.warning("request failed (attempt %d/%d): %s", attempt + 1, cfg.retries + 1, last)
                continue
            if resp.status_code in _RETRYABLE_STATUS:
                last = f"HTTP {resp.status_code}"
                logger.warning("request failed (attempt %d/%d): %s", attempt + 1, cfg.retries + 1, last)
                continue
            if resp.status_code >= 400:
                raise TransportFailure(f"HTTP {resp.status_code}: {resp.text[:200]}")
            if len(resp.content) > cfg.max_response_chars * 4:
                raise ResponseTooLarge(f"response body of {len(resp.content)} bytes")
            try:
                text = self._extract(resp.json())
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportFailure(f"unexpected response payload: {exc}") from None
            if len(text) > cfg.max_response_chars:
                raise ResponseTooLarge(f"response of {len(text)} characters exceeds {cfg.max_response_chars}")
            return text
        raise TransportFailure(f"giving up after {cfg.retries + 1} attempts: {last}")


def make_backend(config: BackendConfig, transport: httpx.BaseTransport | None = None) -> Backend:
    if config.kind == "scripted":
        if config.cassette:
            backend: Backend = ScriptedBackend.from_cassette(config.cassette)
        else:
            backend = ScriptedBackend(config.script)
    else:
        backend = RemoteBackend(config, transport=transport)
    if config.record_to:
        backend = RecordingBackend(backend, config.record_to)
    return backend


def complete(backend: Backend, prompt: PromptDocument) -> str:
    return backend.complete(prompt)
