"""Prompt template registry.

Templates are versioned plain-text files keyed by template id, with named
``str.format`` placeholders (e.g. ``{query}``, ``{attributes}``,
``{profile}``); an optional ``<id>.schema.json`` next to the template
supplies the response schema.  Keeping prompts in files lets fixtures and
wording evolve without code changes.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib.resources import files
from typing import Optional

from .llm import ChatRequest, Message

__all__ = ["load_template", "load_schema", "render", "build_request"]

_SYSTEM_PROMPT = (
    "You are a careful shopping assistant for an e-commerce catalog. "
    "Follow the output instructions exactly."
)


def _templates_dir():
    return files("shopagent") / "templates"


@lru_cache(maxsize=None)
def load_template(template_id: str) -> str:
    path = _templates_dir() / f"{template_id}.txt"
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise KeyError(f"unknown template id: {template_id}") from None


@lru_cache(maxsize=None)
def _load_schema_text(template_id: str) -> Optional[str]:
    path = _templates_dir() / f"{template_id}.schema.json"
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        return None


def load_schema(template_id: str) -> Optional[dict]:
    text = _load_schema_text(template_id)
    return json.loads(text) if text is not None else None


def render(template_id: str, **values: str) -> str:
    return load_template(template_id).format(**values)


def build_request(
    template_id: str,
    *,
    model: str = "default",
    temperature: float = 0.0,
    max_tokens: int = 1024,
    timeout_s: float = 30.0,
    **values: str,
) -> ChatRequest:
    """Render the template into a system+user request carrying the
    template's schema (when one exists) and its id for stub routing."""
    return ChatRequest(
        messages=[
            Message("system", _SYSTEM_PROMPT),
            Message("user", render(template_id, **values)),
        ],
        model=model,
        response_schema=load_schema(template_id),
        temperature=temperature,
        max_tokens=max_tokens,
        timeout_s=timeout_s,
        template_id=template_id,
    )
