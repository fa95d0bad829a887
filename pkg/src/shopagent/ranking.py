"""Personalized top-K ranking: score fusion plus an optional LLM rerank.

The required path is deterministic: fused = alpha * clamped retrieval
score + beta * profile affinity.  The LLM rerank is best-effort and
fail-open (a gateway failure returns the input flagged degraded), and it
can never introduce a product id that was not in its input.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

from .catalog import CatalogHandle, lookup
from .errors import GroundingError, SchemaViolation, TransportError
from .llm import Backend, complete_chat
from .personalization import UserProfile, affinity, profile_prompt_text
from .prompts import build_request
from .retrieval import RetrievalResult

logger = logging.getLogger(__name__)

__all__ = ["RankWeights", "RankedItem", "RankedList", "rank_top_k", "llm_rerank"]


@dataclass(frozen=True)
class RankWeights:
    alpha: float = 0.7  # retrieval
    beta: float = 0.3   # affinity

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("weights must be non-negative")
        if abs(self.alpha + self.beta - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


@dataclass
class RankedItem:
    product_id: str
    fused_score: float
    retrieval_score: float
    affinity_score: float
    rank: int
    explanation: Optional[str] = None


@dataclass
class RankedList:
    items: list[RankedItem] = field(default_factory=list)
    degraded: bool = False
    notes: list[str] = field(default_factory=list)

    def ids(self) -> list[str]:
        return [item.product_id for item in self.items]


def _reassign_ranks(items: list[RankedItem]) -> None:
    for position, item in enumerate(items, start=1):
        item.rank = position


def rank_top_k(
    candidates: list[RetrievalResult],
    profile: Optional[UserProfile],
    catalog: CatalogHandle,
    k: int,
    weights: RankWeights = RankWeights(),
) -> RankedList:
    """Fuse and sort (fused desc, retrieval desc, id asc), truncate to k.

    Negative retrieval scores clamp to 0 before fusion so the fused score
    stays in [0, 1].  An unknown product id is a grounding breach and
    raises loudly.
    """
    items = []
    for candidate in candidates:
        product = lookup(catalog, candidate.product_id)
        if product is None:
            raise GroundingError(
                f"candidate {candidate.product_id!r} is not in the catalog"
            )
        clamped = min(max(candidate.score, 0.0), 1.0)
        affinity_score = affinity(profile, product)
        items.append(RankedItem(
            product_id=candidate.product_id,
            fused_score=weights.alpha * clamped + weights.beta * affinity_score,
            retrieval_score=candidate.score,
            affinity_score=affinity_score,
            rank=0,
        ))
    items.sort(key=lambda it: (-it.fused_score, -it.retrieval_score, it.product_id))
    items = items[:k]
    _reassign_ranks(items)
    return RankedList(items=items)


def llm_rerank(
    ranked: RankedList,
    profile: Optional[UserProfile],
    gateway: Backend,
    *,
    enabled: bool = True,
    query: str = "",
    model: str = "default",
) -> RankedList:
    """Optional rerank pass; echoed ids keep the model's order and gain
    explanations, omitted ids are appended in prior order, invented ids
    are dropped with a note."""
    if not enabled or not ranked.items:
        return ranked

    request = build_request(
        "rank.rerank",
        model=model,
        products=json.dumps([
            {"product_id": it.product_id,
             "retrieval_score": round(it.retrieval_score, 4),
             "affinity_score": round(it.affinity_score, 4)}
            for it in ranked.items
        ]),
        profile=profile_prompt_text(profile),
        query=query,
    )
    try:
        response = complete_chat(gateway, request)
    except (SchemaViolation, TransportError) as exc:
        logger.warning("rerank degraded to fused order: %s", exc)
        return RankedList(items=ranked.items, degraded=True,
                          notes=[*ranked.notes, f"rerank failed: {exc}"])

    by_id = {item.product_id: item for item in ranked.items}
    notes = list(ranked.notes)
    reordered: list[RankedItem] = []
    seen: set[str] = set()
    for entry in response.parsed:
        product_id = entry["product_id"]
        if product_id in seen:
            continue
        item = by_id.get(product_id)
        if item is None:
            notes.append(f"rerank invented id {product_id!r}; dropped")
            continue
        explanation = entry.get("explanation", "").strip()
        if explanation:
            item.explanation = explanation
        reordered.append(item)
        seen.add(product_id)
    for item in ranked.items:
        if item.product_id not in seen:
            reordered.append(item)

    _reassign_ranks(reordered)
    return RankedList(items=reordered, degraded=False, notes=notes)
