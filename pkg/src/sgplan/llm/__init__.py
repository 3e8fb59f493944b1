from .backends import (
    Backend,
    BackendConfig,
    BackendError,
    ConfigError,
    RecordingBackend,
    RemoteBackend,
    ResponseTooLarge,
    ScriptedBackend,
    ScriptExhausted,
    TransportFailure,
    complete,
    make_backend,
    read_cassette,
)
from .parsing import LlmTurn, ParseError, ParseErrorKind, parse_response
from .prompt import PromptDocument, build_prompt, render_memory

__all__ = [
    "Backend",
    "BackendConfig",
    "BackendError",
    "ConfigError",
    "LlmTurn",
    "ParseError",
    "ParseErrorKind",
    "PromptDocument",
    "RecordingBackend",
    "RemoteBackend",
    "ResponseTooLarge",
    "ScriptExhausted",
    "ScriptedBackend",
    "TransportFailure",
    "build_prompt",
    "complete",
    "make_backend",
    "parse_response",
    "read_cassette",
    "render_memory",
]
