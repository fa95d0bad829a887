"""Query understanding: attribute extraction, structured formulation and
hypothetical-product generation.

Three sequential LLM calls. Price bounds are promoted into hard filter
constraints by deterministic post-processing, never trusted to the model;
all other attributes stay soft (ranking boosts only).  Hypotheticals are
capped at 8 to bound downstream retrieval fan-out.
"""

from __future__ import annotations

import json
import logging
import re
import time
import uuid
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Any, Optional

from .bench import Stage, StageTiming
from .catalog import FilterConstraints, normalize_attribute
from .errors import PipelineError, SchemaViolation, TransportError
from .llm import Backend, complete_chat
from .personalization import UserProfile, profile_prompt_text
from .prompts import build_request, render

logger = logging.getLogger(__name__)

__all__ = [
    "AttributePair",
    "StructuredQuery",
    "HypotheticalProduct",
    "Stage1Output",
    "extract_attributes",
    "formulate_query",
    "generate_hypothetical_products",
    "run_stage1",
    "MAX_HYPOTHETICALS",
]

MAX_HYPOTHETICALS = 8

_PRICE_NAMES = {"price", "price max", "price min", "price_max", "price_min",
                "max price", "min price", "cost", "budget", "price range"}
_PRICE_MAX_RE = re.compile(r"(?:under|below|less than|at most|up to|max(?:imum)?)\s*\$?\s*(\d+(?:\.\d+)?)")
_PRICE_MIN_RE = re.compile(r"(?:over|above|more than|at least|min(?:imum)?)\s*\$?\s*(\d+(?:\.\d+)?)")
_BARE_NUMBER_RE = re.compile(r"^\$?\s*(\d+(?:\.\d+)?)$")


@dataclass(frozen=True)
class AttributePair:
    name: str
    value: str


@dataclass
class StructuredQuery:
    category: str = ""
    attributes: list[AttributePair] = field(default_factory=list)
    values: list[str] = field(default_factory=list)
    hard_constraints: FilterConstraints = field(default_factory=FilterConstraints)

    def to_dict(self) -> dict[str, Any]:
        hc = self.hard_constraints
        return {
            "category": self.category,
            "attributes": [[p.name, p.value] for p in self.attributes],
            "values": self.values,
            "hard_constraints": {
                "category_prefix": hc.category_prefix,
                "attribute_equals": [list(pair) for pair in hc.attribute_equals],
                "price_min": str(hc.price_min) if hc.price_min is not None else None,
                "price_max": str(hc.price_max) if hc.price_max is not None else None,
                "in_stock_only": hc.in_stock_only,
            },
        }


@dataclass(frozen=True)
class HypotheticalProduct:
    category: str
    specific_item: str = ""
    generic_item: str = ""
    relevance_note: str = ""

    def is_valid(self) -> bool:
        return bool(self.category) and bool(self.specific_item or self.generic_item)

    def query_text(self) -> str:
        return f"{self.category} {self.specific_item} {self.generic_item}"

    def to_dict(self) -> dict[str, str]:
        return {
            "category": self.category,
            "specific_item": self.specific_item,
            "generic_item": self.generic_item,
            "relevance_note": self.relevance_note,
        }


@dataclass
class Stage1Output:
    structured_query: StructuredQuery
    hypotheticals: list[HypotheticalProduct]
    timing: StageTiming
    trace_id: str
    hyde_prompt: str = ""  # rendered generation prompt, kept for SFT export

    def to_dict(self) -> dict[str, Any]:
        return {
            "trace_id": self.trace_id,
            "structured_query": self.structured_query.to_dict(),
            "hypotheticals": [h.to_dict() for h in self.hypotheticals],
        }


def _price_bound(name: str, value: str) -> Optional[tuple[str, str]]:
    """("price_max"|"price_min", numeric string) when the pair expresses a
    price bound, else None."""
    if name == "price_max" or name in {"max price", "price max"}:
        m = _PRICE_MAX_RE.search(value) or _BARE_NUMBER_RE.match(value)
        return ("price_max", m.group(1)) if m else None
    if name == "price_min" or name in {"min price", "price min"}:
        m = _PRICE_MIN_RE.search(value) or _BARE_NUMBER_RE.match(value)
        return ("price_min", m.group(1)) if m else None
    if name in _PRICE_NAMES:
        m = _PRICE_MAX_RE.search(value)
        if m:
            return ("price_max", m.group(1))
        m = _PRICE_MIN_RE.search(value)
        if m:
            return ("price_min", m.group(1))
        m = _BARE_NUMBER_RE.match(value)
        if m:  # a bare "price: 100" reads as a budget ceiling
            return ("price_max", m.group(1))
    return None


def _normalize_pair(raw_name: str, raw_value: str) -> Optional[AttributePair]:
    name = normalize_attribute(raw_name)
    value = normalize_attribute(raw_value)
    if not name or not value:
        return None
    bound = _price_bound(name, value)
    if bound is not None:
        return AttributePair(*bound)
    return AttributePair(name, value)


def _wrap_gateway_error(exc: Exception, stage: str, trace_id: str) -> PipelineError:
    return PipelineError(f"{stage} failed: {exc}", stage=stage, trace_id=trace_id)


def extract_attributes(
    query: str,
    profile: Optional[UserProfile],
    gateway: Backend,
    *,
    model: str = "default",
    trace_id: str = "",
) -> list[AttributePair]:
    """LLM pass mapping the raw query to normalized (name, value) pairs.

    Price phrases come back as price_max/price_min pairs with bare numeric
    values.  An empty extraction result is an allowed abstention.
    """
    if not query.strip():
        raise ValueError("query must be non-empty")
    request = build_request("stage1.attrs", model=model, query=query,
                            profile=profile_prompt_text(profile))
    try:
        response = complete_chat(gateway, request)
    except (SchemaViolation, TransportError) as exc:
        raise _wrap_gateway_error(exc, "stage1.attrs", trace_id) from exc

    pairs = []
    for entry in response.parsed:
        pair = _normalize_pair(entry["name"], entry["value"])
        if pair is None:
            logger.debug("dropping empty attribute pair %r (trace %s)", entry, trace_id)
            continue
        pairs.append(pair)
    return pairs


def _promote_price_constraints(
    pairs: list[AttributePair],
    constraints: FilterConstraints,
) -> None:
    """First price_max/price_min pair wins; value parsed as a decimal."""
    for pair in pairs:
        if pair.name not in ("price_max", "price_min"):
            continue
        try:
            amount = Decimal(pair.value)
        except InvalidOperation:
            logger.debug("unparseable price bound %r ignored", pair)
            continue
        if pair.name == "price_max" and constraints.price_max is None:
            constraints.price_max = amount
        elif pair.name == "price_min" and constraints.price_min is None:
            constraints.price_min = amount


def formulate_query(
    attributes: list[AttributePair],
    profile: Optional[UserProfile],
    gateway: Backend,
    *,
    model: str = "default",
    trace_id: str = "",
) -> StructuredQuery:
    """Single LLM pass shaping extracted pairs into a structured search.

    Price bounds from the extracted pairs are forced into hard constraints
    after the call, regardless of what the model returned.
    """
    request = build_request(
        "stage1.formulate",
        model=model,
        attributes=json.dumps([[p.name, p.value] for p in attributes]),
        profile=profile_prompt_text(profile),
    )
    try:
        response = complete_chat(gateway, request)
    except (SchemaViolation, TransportError) as exc:
        raise _wrap_gateway_error(exc, "stage1.formulate", trace_id) from exc

    parsed = response.parsed
    out_attributes = []
    for entry in parsed.get("attributes", []):
        pair = _normalize_pair(entry["name"], entry["value"])
        if pair is not None:
            out_attributes.append(pair)
    values = [v.strip() for v in parsed.get("values", []) if v.strip()]

    sq = StructuredQuery(
        category=normalize_attribute(parsed.get("category", "")),
        attributes=out_attributes,
        values=values,
    )
    # Deterministic promotion: extracted pairs take precedence over any
    # echo the model produced.
    _promote_price_constraints(attributes, sq.hard_constraints)
    _promote_price_constraints(out_attributes, sq.hard_constraints)
    return sq


def hyde_prompt_text(
    sq: StructuredQuery,
    profile: Optional[UserProfile],
    query: str,
) -> str:
    """The rendered generation prompt (also what SFT export records)."""
    return render(
        "stage1.hyde",
        attributes=json.dumps({"category": sq.category,
                               "attributes": [[p.name, p.value] for p in sq.attributes],
                               "values": sq.values}),
        query=query,
        profile=profile_prompt_text(profile),
    )


def generate_hypothetical_products(
    sq: StructuredQuery,
    profile: Optional[UserProfile],
    gateway: Backend,
    *,
    query: str = "",
    model: str = "default",
    trace_id: str = "",
) -> list[HypotheticalProduct]:
    """HyDE pass: idealized catalog items capturing the intent.

    Entries violating the invariants (no category, or neither a specific
    nor a generic item) are dropped with a trace note; it is an error only
    when nothing survives.  Output is capped at MAX_HYPOTHETICALS.
    """
    request = build_request(
        "stage1.hyde",
        model=model,
        attributes=json.dumps({"category": sq.category,
                               "attributes": [[p.name, p.value] for p in sq.attributes],
                               "values": sq.values}),
        query=query,
        profile=profile_prompt_text(profile),
    )
    try:
        response = complete_chat(gateway, request)
    except (SchemaViolation, TransportError) as exc:
        raise _wrap_gateway_error(exc, "stage1.hyde", trace_id) from exc

    hypotheticals = []
    for entry in response.parsed:
        hyp = HypotheticalProduct(
            category=entry.get("category", "").strip(),
            specific_item=entry.get("specific_item", "").strip(),
            generic_item=entry.get("generic_item", "").strip(),
            relevance_note=entry.get("relevance_note", "").strip(),
        )
        if not hyp.is_valid():
            logger.debug("dropping invalid hypothetical %r (trace %s)", entry, trace_id)
            continue
        hypotheticals.append(hyp)

    if not hypotheticals:
        raise PipelineError("no valid hypothetical products generated",
                            stage="stage1.hyde", trace_id=trace_id)
    return hypotheticals[:MAX_HYPOTHETICALS]


def run_stage1(
    query: str,
    profile: Optional[UserProfile],
    gateway: Backend,
    *,
    model: str = "default",
    trace_id: Optional[str] = None,
) -> Stage1Output:
    """extract -> formulate -> generate, sequentially; the first failing
    sub-step aborts with its error. Timing covers all three calls."""
    if not query.strip():
        raise ValueError("query must be non-empty")
    trace = trace_id or uuid.uuid4().hex
    start = time.monotonic()
    attributes = extract_attributes(query, profile, gateway, model=model, trace_id=trace)
    sq = formulate_query(attributes, profile, gateway, model=model, trace_id=trace)
    hypotheticals = generate_hypothetical_products(
        sq, profile, gateway, query=query, model=model, trace_id=trace,
    )
    timing = StageTiming(stage=Stage.STAGE1, duration_s=time.monotonic() - start,
                         trace_id=trace)
    return Stage1Output(
        structured_query=sq,
        hypotheticals=hypotheticals,
        timing=timing,
        trace_id=trace,
        hyde_prompt=hyde_prompt_text(sq, profile, query),
    )
