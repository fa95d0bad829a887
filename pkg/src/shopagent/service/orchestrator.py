"""Turn orchestration: intent routing, tool dispatch and constraint memory.

Search-like intents run the full pipeline (stage 1 -> retrieval ->
ranking) with the session's accumulated hard constraints merged in,
newest-wins per field.  Cart references resolve ordinals against the last
shown list.  Pipeline failures produce a typed apology turn; the session
itself is never corrupted.
"""

from __future__ import annotations

import logging
import re
import uuid
from enum import Enum
from typing import Optional

from ..bench import InstrumentedRun, Stage, instrument_run
from ..catalog import FilterConstraints, lookup
from ..errors import PipelineError, SchemaViolation, TransportError
from ..llm import complete_chat
from ..personalization import UserProfile
from ..prompts import build_request
from ..query_pipeline import run_stage1
from ..ranking import RankWeights, llm_rerank, rank_top_k
from ..retrieval import retrieve
from .sessions import ChatTurn, Session
from .state import AppState

logger = logging.getLogger(__name__)

__all__ = ["Intent", "classify_intent", "handle_turn", "merge_constraints",
           "run_search_pipeline"]


class Intent(str, Enum):
    SEARCH = "search"
    RECOMMEND = "recommend"
    COMPARE = "compare"
    CART_ADD = "cart_add"
    SMALLTALK = "smalltalk"


_PIPELINE_INTENTS = (Intent.SEARCH, Intent.RECOMMEND, Intent.COMPARE)
_RESET_RE = re.compile(r"\b(reset|start over|clear (the )?filters)\b", re.IGNORECASE)

_ORDINALS = {
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9, "tenth": 10,
    "1st": 1, "2nd": 2, "3rd": 3, "4th": 4, "5th": 5,
    "6th": 6, "7th": 7, "8th": 8, "9th": 9, "10th": 10,
}


def classify_intent(
    message: str,
    history: list[ChatTurn],
    gateway,
    *,
    model: str = "default",
) -> tuple[Intent, bool]:
    """(intent, degraded): the fallback on any gateway trouble is search."""
    if not message.strip():
        raise ValueError("message must be non-empty")
    # Compact summary rather than raw turn text: keeps the prompt short and
    # keeps scripted-stub substring matching anchored to the live message.
    last_intent = next((t.intent for t in reversed(history) if t.role == "agent"), None)
    shown = sum(1 for t in history if t.role == "agent" and t.products)
    window = f"turns={len(history)} last_intent={last_intent or 'none'} result_turns={shown}"
    request = build_request("agent.intent", model=model, query=message, history=window)
    try:
        response = complete_chat(gateway, request)
        return Intent(response.parsed["intent"]), False
    except (SchemaViolation, TransportError, ValueError) as exc:
        logger.warning("intent classification degraded to search: %s", exc)
        return Intent.SEARCH, True


def merge_constraints(
    base: FilterConstraints,
    new: FilterConstraints,
) -> FilterConstraints:
    """Newest-wins per field; a stale bound that now contradicts a fresh
    one is dropped rather than raising."""
    price_min = new.price_min if new.price_min is not None else base.price_min
    price_max = new.price_max if new.price_max is not None else base.price_max
    if price_min is not None and price_max is not None and price_min > price_max:
        if new.price_min is None:
            price_min = None
        else:
            price_max = None
    return FilterConstraints(
        category_prefix=(new.category_prefix if new.category_prefix is not None
                         else base.category_prefix),
        attribute_equals=(new.attribute_equals if new.attribute_equals
                          else list(base.attribute_equals)),
        price_min=price_min,
        price_max=price_max,
        in_stock_only=new.in_stock_only,
    )


def _resolve_cart_ref(message: str, shown) -> Optional[str]:
    shown_ids = {item.product_id for item in shown}
    for token in re.findall(r"[\w-]+", message):
        if token in shown_ids:
            return token
    lowered = message.lower()
    for word, position in _ORDINALS.items():
        if re.search(rf"\b{re.escape(word)}\b", lowered) and position <= len(shown):
            return shown[position - 1].product_id
    match = re.search(r"\b(?:number|item|option|#)\s*(\d+)\b", lowered)
    if match:
        position = int(match.group(1))
        if 1 <= position <= len(shown):
            return shown[position - 1].product_id
    return None


def _profile_for(session: Session, state: AppState) -> Optional[UserProfile]:
    if session.user_id:
        return state.profiles.get(session.user_id)
    return None


def run_search_pipeline(
    state: AppState,
    query: str,
    profile: Optional[UserProfile] = None,
    *,
    trace_id: Optional[str] = None,
    k: Optional[int] = None,
) -> InstrumentedRun:
    """Stateless stage1 -> retrieval -> ranking invocation (no session
    memory); result is a (stage1, candidates, ranked) triple.  Shared by
    the search endpoint and the bench campaign driver."""
    catalog, vindex = state.snapshot()
    config = state.config
    weights = RankWeights(alpha=config.rank_alpha, beta=config.rank_beta)

    def stage1_step(_):
        return run_stage1(query, profile, state.gateway,
                          model=config.model_for("stage1"), trace_id=trace_id)

    def retrieval_step(stage1):
        return stage1, retrieve(stage1, catalog, vindex, state.embedder,
                                k_per_hyp=config.k_per_hyp, k_final=config.k_final)

    def ranking_step(pair):
        stage1, candidates = pair
        return stage1, candidates, rank_top_k(candidates, profile, catalog,
                                              k or config.top_k, weights)

    return instrument_run(
        [(Stage.STAGE1, stage1_step), (Stage.RETRIEVAL, retrieval_step),
         (Stage.RANKING, ranking_step)],
        trace_id=trace_id,
    )


def _run_pipeline_turn(
    session: Session,
    message: str,
    intent: Intent,
    state: AppState,
    degraded: bool,
) -> ChatTurn:
    catalog, vindex = state.snapshot()
    profile = _profile_for(session, state)
    config = state.config
    trace = uuid.uuid4().hex
    weights = RankWeights(alpha=config.rank_alpha, beta=config.rank_beta)

    def stage1_step(_):
        stage1 = run_stage1(message, profile, state.gateway,
                            model=config.model_for("stage1"), trace_id=trace)
        merged = merge_constraints(session.extracted_constraints,
                                   stage1.structured_query.hard_constraints)
        stage1.structured_query.hard_constraints = merged
        session.extracted_constraints = merged
        return stage1

    def retrieval_step(stage1):
        candidates = retrieve(stage1, catalog, vindex, state.embedder,
                              k_per_hyp=config.k_per_hyp, k_final=config.k_final)
        return stage1, candidates

    def ranking_step(pair):
        stage1, candidates = pair
        ranked = rank_top_k(candidates, profile, catalog, config.top_k, weights)
        if config.rerank_enabled:
            ranked = llm_rerank(ranked, profile, state.gateway,
                                query=message, model=config.model_for("rerank"))
        return stage1, candidates, ranked

    run = instrument_run(
        [(Stage.STAGE1, stage1_step), (Stage.RETRIEVAL, retrieval_step),
         (Stage.RANKING, ranking_step)],
        trace_id=trace,
    )
    if run.partial:
        logger.warning("pipeline turn failed (%s): %s", trace, run.error)
        return ChatTurn(
            role="agent",
            text="Sorry - I hit a problem while searching. Please try again.",
            intent=intent.value,
            timings=run.timings,
            degraded=True,
            error_code="pipeline_error",
            constraints_snapshot=session.extracted_constraints,
        )

    stage1, candidates, ranked = run.result
    best_source = {c.product_id: c.best_source for c in candidates}
    groups = []
    for index, hyp in enumerate(stage1.hypotheticals):
        groups.append({
            "title": hyp.category,
            "note": hyp.relevance_note,
            "product_ids": [item.product_id for item in ranked.items
                            if best_source.get(item.product_id) == index],
        })
    if ranked.items:
        top_product = lookup(catalog, ranked.items[0].product_id)
        text = (f"I found {len(ranked.items)} matching products. "
                f"Top pick: {top_product.title}.")
    else:
        text = ("I could not find products matching all of your constraints. "
                "Try relaxing the price range or the category.")
    return ChatTurn(
        role="agent",
        text=text,
        intent=intent.value,
        products=ranked.items,
        groups=groups,
        timings=run.timings,
        degraded=degraded or ranked.degraded,
        constraints_snapshot=stage1.structured_query.hard_constraints,
    )


def _cart_turn(session: Session, message: str, state: AppState) -> ChatTurn:
    catalog, _ = state.snapshot()
    shown = session.last_shown_products()
    product_id = _resolve_cart_ref(message, shown)
    if product_id is None:
        return ChatTurn(
            role="agent",
            text="Which of the shown items should I add? Say for example "
                 "\"add the first one\" or give the product id.",
            intent=Intent.CART_ADD.value,
            error_code="unknown_cart_ref",
        )
    product = lookup(catalog, product_id)
    if product is None:  # grounding at insertion time
        return ChatTurn(
            role="agent",
            text="That item is no longer in the catalog, sorry.",
            intent=Intent.CART_ADD.value,
            error_code="unknown_product",
        )
    if product_id not in session.cart:
        session.cart.append(product_id)
    return ChatTurn(
        role="agent",
        text=f"Added {product.title} to your cart ({len(session.cart)} items).",
        intent=Intent.CART_ADD.value,
    )


def _smalltalk_turn(message: str, state: AppState, degraded: bool) -> ChatTurn:
    try:
        request = build_request("agent.smalltalk", model=state.config.model_for("smalltalk"),
                                query=message)
        reply = complete_chat(state.gateway, request).raw_text.strip()
    except (SchemaViolation, TransportError):
        reply, degraded = "Hi! Tell me what you are shopping for.", True
    return ChatTurn(role="agent", text=reply or "Hi!",
                    intent=Intent.SMALLTALK.value, degraded=degraded)


def handle_turn(session: Session, message: str, state: AppState) -> ChatTurn:
    """Append the user turn, dispatch on intent, append and return the
    agent turn. Callers serialize per session via the store lock."""
    if not message.strip():
        raise ValueError("message must be non-empty")
    session.turns.append(ChatTurn(role="user", text=message))

    if _RESET_RE.search(message):
        session.extracted_constraints = FilterConstraints()

    intent, degraded = classify_intent(message, session.turns[:-1], state.gateway,
                                       model=state.config.model_for("intent"))
    try:
        if intent in _PIPELINE_INTENTS:
            turn = _run_pipeline_turn(session, message, intent, state, degraded)
        elif intent is Intent.CART_ADD:
            turn = _cart_turn(session, message, state)
        else:
            turn = _smalltalk_turn(message, state, degraded)
    except (PipelineError, SchemaViolation, TransportError) as exc:
        logger.warning("turn failed: %s", exc)
        turn = ChatTurn(
            role="agent",
            text="Sorry - something went wrong handling that request.",
            intent=intent.value,
            degraded=True,
            error_code="agent_error",
        )
    session.turns.append(turn)
    return turn
