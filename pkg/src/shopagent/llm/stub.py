"""Scripted stub backend: the deterministic test double for every suite.

A script is an ordered rule list; the first rule whose template id and
substring predicate both match wins.  Identical requests always yield
byte-identical responses, so the whole primary test suite runs with zero
network access.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .types import ChatRequest, Usage

__all__ = ["StubRule", "StubScript", "StubBackend", "load_stub_script", "register_stub_fixture"]


@dataclass(frozen=True)
class StubRule:
    """Matches on the request's template id and/or a substring of the last
    user message; None means "any"."""

    template_id: Optional[str] = None
    contains: Optional[str] = None
    response: str = ""
    delay_s: float = 0.0  # injected latency, for bench harness scripts

    def matches(self, request: ChatRequest) -> bool:
        if self.template_id is not None and self.template_id != request.template_id:
            return False
        if self.contains is not None and self.contains not in request.last_user_content():
            return False
        return True


@dataclass
class StubScript:
    rules: list[StubRule] = field(default_factory=list)
    default_response: str = ""

    def match(self, request: ChatRequest) -> StubRule:
        for rule in self.rules:
            if rule.matches(request):
                return rule
        return StubRule(response=self.default_response)


def register_stub_fixture(script: StubScript, rule: StubRule) -> StubScript:
    """Append a rule; earlier rules keep precedence (first match wins)."""
    script.rules.append(rule)
    return script


def load_stub_script(path: Union[str, Path]) -> StubScript:
    """Load a script from a JSON fixture file.

    Format: {"default_response": str, "rules": [{"template_id", "contains",
    "response", "delay_s"}]} where every rule key except "response" is
    optional.
    """
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    rules = [
        StubRule(
            template_id=entry.get("template_id"),
            contains=entry.get("contains"),
            response=entry["response"],
            delay_s=float(entry.get("delay_s", 0.0)),
        )
        for entry in payload.get("rules", [])
    ]
    return StubScript(rules=rules, default_response=payload.get("default_response", ""))


class StubBackend:
    """Pure function of (script, request), aside from optional sleeps."""

    def __init__(self, script: StubScript, tag: str = "stub") -> None:
        self.script = script
        self.tag = tag

    def complete_text(self, request: ChatRequest) -> tuple[str, Usage]:
        rule = self.script.match(request)
        if rule.delay_s > 0:
            time.sleep(rule.delay_s)
        prompt_tokens = sum(len(m.content.split()) for m in request.messages)
        return rule.response, Usage(
            prompt_tokens=prompt_tokens,
            completion_tokens=len(rule.response.split()),
        )
