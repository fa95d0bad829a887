"""Schema-constrained chat completion with bounded repair.

Flow for schema-bearing requests: strict parse + validate; on failure,
exactly one repair round trip (original output and the violation list
appended as a user message); on failure again, deterministic extraction of
the first balanced JSON value from the raw text.  Anything beyond that is
a typed :class:`SchemaViolation` carrying the raw text for audit.
"""

from __future__ import annotations

import json
import time
from dataclasses import replace
from typing import Any, Optional

from ..errors import SchemaViolation
from .json_repair import extract_first_json, schema_violations
from .types import Backend, ChatRequest, ChatResponse, Message

__all__ = ["complete_chat"]


def _strict_parse_validate(raw: str, schema: dict) -> tuple[bool, Any, list[str]]:
    try:
        value = json.loads(raw)
    except json.JSONDecodeError as exc:
        return False, None, [f"$: {exc.msg}"]
    violations = schema_violations(value, schema)
    if violations:
        return False, None, violations
    return True, value, []


def _extract_and_validate(raw: str, schema: dict) -> tuple[bool, Any]:
    candidate = extract_first_json(raw)
    if candidate is None:
        return False, None
    value = json.loads(candidate)
    if schema_violations(value, schema):
        return False, None
    return True, value


def _repair_message(violations: list[str]) -> Message:
    bullet_list = "\n".join(f"- {v}" for v in violations)
    return Message(
        "user",
        "The previous reply was not valid for the required JSON schema. "
        f"Violations:\n{bullet_list}\n"
        "Reply again with only a valid JSON value matching the schema. "
        "No prose, no code fences.",
    )


def complete_chat(backend: Backend, request: ChatRequest) -> ChatResponse:
    """Run one chat exchange; latency covers the full exchange including
    the repair round when one happens."""
    start = time.monotonic()
    raw, usage = backend.complete_text(request)
    parsed: Any = None
    repair_rounds = 0

    schema: Optional[dict] = request.response_schema
    if schema is not None:
        ok, parsed, violations = _strict_parse_validate(raw, schema)
        if not ok:
            repair_rounds = 1
            repair_request = replace(
                request,
                messages=[*request.messages, Message("assistant", raw),
                          _repair_message(violations)],
            )
            repaired_raw, repair_usage = backend.complete_text(repair_request)
            usage = usage + repair_usage
            ok, parsed, _ = _strict_parse_validate(repaired_raw, schema)
            if not ok:
                # Deterministic fallback: first balanced JSON value, trying
                # the repaired output first, then the original.
                for text in (repaired_raw, raw):
                    ok, parsed = _extract_and_validate(text, schema)
                    if ok:
                        break
            raw = repaired_raw
            if not ok:
                raise SchemaViolation(
                    "model output failed schema validation after repair and extraction",
                    violations=violations,
                    raw_text=raw,
                )
        # Contract, not assumption: whatever route produced `parsed`, it
        # must validate against the request schema.
        leftover = schema_violations(parsed, schema)
        if leftover:  # pragma: no cover - guards gateway bugs
            raise SchemaViolation("gateway produced a non-conforming value",
                                  violations=leftover, raw_text=raw)

    return ChatResponse(
        raw_text=raw,
        parsed=parsed,
        usage=usage,
        latency_s=time.monotonic() - start,
        backend_tag=backend.tag,
        repair_rounds=repair_rounds,
    )
