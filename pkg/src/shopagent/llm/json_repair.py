"""Pure JSON validation and extraction helpers (no network).

``validate_and_repair_json`` is the deterministic half of the guided-JSON
contract: strict parse then schema validation; if parsing fails, the first
balanced top-level JSON object or array in the text is extracted and
retried.  Field values are never mutated.
"""

from __future__ import annotations

import json
from typing import Any, Optional

import jsonschema

from ..errors import SchemaViolation

__all__ = ["extract_first_json", "schema_violations", "validate_and_repair_json"]

_OPENERS = {"{": "}", "[": "]"}


def extract_first_json(text: str) -> Optional[str]:
    """The first balanced top-level JSON object/array substring, or None.

    Scans character-wise, respecting string literals and escapes, so prose
    and markdown fences around the value are ignored.
    """
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch not in _OPENERS:
            i += 1
            continue
        depth = 0
        in_string = False
        escaped = False
        for j in range(i, n):
            c = text[j]
            if in_string:
                if escaped:
                    escaped = False
                elif c == "\\":
                    escaped = True
                elif c == '"':
                    in_string = False
                continue
            if c == '"':
                in_string = True
            elif c in "{[":
                depth += 1
            elif c in "}]":
                depth -= 1
                if depth == 0:
                    candidate = text[i:j + 1]
                    try:
                        json.loads(candidate)
                    except json.JSONDecodeError:
                        break
                    return candidate
                if depth < 0:
                    break
        i += 1
    return None


def schema_violations(value: Any, schema: dict) -> list[str]:
    """Human-readable list of schema violations; empty when valid."""
    validator = jsonschema.Draft202012Validator(schema)
    messages = []
    for error in validator.iter_errors(value):
        path = "/".join(str(p) for p in error.absolute_path) or "$"
        messages.append(f"{path}: {error.message}")
    return sorted(messages)


def validate_and_repair_json(raw: str, schema: dict) -> Any:
    """Parse and validate; on parse failure, extract and retry once.

    Raises :class:`SchemaViolation` naming the violations when no valid
    value can be recovered.
    """
    try:
        value = json.loads(raw)
    except json.JSONDecodeError as exc:
        candidate = extract_first_json(raw)
        if candidate is None:
            raise SchemaViolation(
                "no parseable JSON in model output",
                violations=[f"$: {exc.msg}"],
                raw_text=raw,
            ) from exc
        value = json.loads(candidate)

    violations = schema_violations(value, schema)
    if violations:
        raise SchemaViolation(
            "model output does not match the response schema",
            violations=violations,
            raw_text=raw,
        )
    return value
