"""Request/response types shared by all chat backends."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Protocol

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")


@dataclass
class ChatRequest:
    """One chat-completion call.

    ``template_id`` tags which prompt template produced the request; stub
    backends route on it and traces record it.
    """

    messages: list[Message]
    model: str = "default"
    response_schema: Optional[dict] = None
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout_s: float = 30.0
    template_id: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("ChatRequest needs at least one message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    def last_user_content(self) -> str:
        for message in reversed(self.messages):
            if message.role == "user":
                return message.content
        return ""


@dataclass
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __add__(self, other: "Usage") -> "Usage":
        return Usage(
            prompt_tokens=self.prompt_tokens + other.prompt_tokens,
            completion_tokens=self.completion_tokens + other.completion_tokens,
        )


@dataclass
class ChatResponse:
    """Backend answer; ``parsed`` is present iff a schema was supplied and
    validation succeeded, and always validates against that schema."""

    raw_text: str
    parsed: Any = None
    usage: Usage = field(default_factory=Usage)
    latency_s: float = 0.0
    backend_tag: str = ""
    repair_rounds: int = 0


class Backend(Protocol):
    """A chat backend returns raw text for a request; no schema handling."""

    tag: str

    def complete_text(self, request: ChatRequest) -> tuple[str, Usage]:
        ...
