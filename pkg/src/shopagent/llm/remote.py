"""OpenAI-compatible HTTP backend (chat-completions wire format)."""

from __future__ import annotations

import os
from typing import Optional

import httpx

from ..errors import TransportError
from .types import ChatRequest, Usage

__all__ = ["OpenAICompatBackend", "backend_from_env"]


class OpenAICompatBackend:
    """POSTs to ``{base_url}/chat/completions`` with bearer auth.

    A custom ``httpx.Client`` may be injected (tests use a mock transport).
    """

    def __init__(
        self,
        base_url: str,
        *,
        api_key: str = "",
        model_tag: str = "",
        timeout_s: Optional[float] = None,
        client: Optional[httpx.Client] = None,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model_tag = model_tag
        self.timeout_s = timeout_s  # overrides per-request timeouts when set
        self.tag = f"http:{model_tag or self.base_url}"
        self._client = client or httpx.Client()

    def complete_text(self, request: ChatRequest) -> tuple[str, Usage]:
        body = {
            "model": self.model_tag or request.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = self._client.post(
                f"{self.base_url}/chat/completions",
                json=body,
                headers=headers,
                timeout=self.timeout_s if self.timeout_s is not None else request.timeout_s,
            )
        except httpx.TimeoutException as exc:
            raise TransportError(f"backend timeout: {exc}", retriable=True) from exc
        except httpx.HTTPError as exc:
            raise TransportError(f"backend unreachable: {exc}", retriable=True) from exc

        if response.status_code >= 500:
            raise TransportError(f"backend error {response.status_code}", retriable=True)
        if response.status_code >= 400:
            raise TransportError(f"backend rejected request: {response.status_code} "
                                 f"{response.text[:200]}", retriable=False)

        data = response.json()
        try:
            content = data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion payload: {exc}", retriable=False) from exc
        usage = data.get("usage") or {}
        return content, Usage(
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
        )


def backend_from_env() -> OpenAICompatBackend:
    """Build a remote backend from BACKEND_URL / API_KEY / MODEL_TAG /
    TIMEOUT_MS."""
    url = os.environ.get("BACKEND_URL", "")
    if not url:
        raise ValueError("BACKEND_URL is not set")
    timeout_ms = os.environ.get("TIMEOUT_MS")
    return OpenAICompatBackend(
        url,
        api_key=os.environ.get("API_KEY", ""),
        model_tag=os.environ.get("MODEL_TAG", ""),
        timeout_s=int(timeout_ms) / 1000.0 if timeout_ms else None,
    )
