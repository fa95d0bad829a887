"""Shared exception hierarchy.

Errors that cross module boundaries live here; modules raise plain
ValueError for programmer-level misuse (bad arguments, dimension
mismatches) and these types for domain failures that callers dispatch on.
"""

from __future__ import annotations


class ShopAgentError(Exception):
    """Base class for all domain errors."""


class CatalogError(ShopAgentError):
    """Unrecoverable catalog problem (unreadable source, bad handle)."""


class TransportError(ShopAgentError):
    """Network-level failure talking to an LLM backend."""

    def __init__(self, message: str, *, retriable: bool = True) -> None:
        super().__init__(message)
        self.retriable = retriable


class SchemaViolation(ShopAgentError):
    """LLM output failed schema validation after repair and extraction.

    Carries the raw model text for audit.
    """

    def __init__(self, message: str, *, violations: list[str] | None = None,
                 raw_text: str = "") -> None:
        super().__init__(message)
        self.violations = violations or []
        self.raw_text = raw_text


class PipelineError(ShopAgentError):
    """A pipeline stage failed; carries the trace id for correlation."""

    def __init__(self, message: str, *, stage: str = "", trace_id: str = "") -> None:
        super().__init__(message)
        self.stage = stage
        self.trace_id = trace_id


class GroundingError(ShopAgentError):
    """A product id escaped the catalog: must never happen silently."""
