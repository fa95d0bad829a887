"""Uniform chat-completion gateway with schema-constrained output.

Backends share one shape (text in, text out); ``complete_chat`` layers the
structured-output contract on top: strict parse + validate, exactly one
repair round trip, then deterministic extraction of the first balanced
JSON value.  Tests run entirely against the scripted stub backend.
"""

from .types import Backend, ChatRequest, ChatResponse, Message, Usage
from .json_repair import extract_first_json, validate_and_repair_json
from .stub import StubBackend, StubRule, StubScript, load_stub_script, register_stub_fixture
from .remote import OpenAICompatBackend, backend_from_env
from .gateway import complete_chat

__all__ = [
    "Backend",
    "ChatRequest",
    "ChatResponse",
    "Message",
    "Usage",
    "extract_first_json",
    "validate_and_repair_json",
    "StubBackend",
    "StubRule",
    "StubScript",
    "load_stub_script",
    "register_stub_fixture",
    "OpenAICompatBackend",
    "backend_from_env",
    "complete_chat",
]
