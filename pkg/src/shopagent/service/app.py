"""HTTP JSON API over the agent.

Every error body has the shape {"code", "message", "trace_id"}.  When
``service_api_key`` is configured, all /v1 routes except /v1/health
require the X-API-Key header.
"""

from __future__ import annotations

import json
import logging
import time
import uuid
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..catalog import lookup
from ..ranking import RankedItem
from .orchestrator import handle_turn
from .sessions import ChatTurn
from .state import AppState

logger = logging.getLogger(__name__)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class ChatBody(BaseModel):
    session_id: str
    message: str


class SearchBody(BaseModel):
    query: str
    profile_id: Optional[str] = None
    k: Optional[int] = None


class CartBody(BaseModel):
    ref: str


class IngestBody(BaseModel):
    path: Optional[str] = None
    content: Optional[str] = None


class FeedbackBody(BaseModel):
    session_id: Optional[str] = None
    message: str


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "trace_id": uuid.uuid4().hex},
    )


def _product_payload(item: RankedItem, catalog, group: Optional[str] = None) -> dict:
    product = lookup(catalog, item.product_id)
    payload = {
        "id": item.product_id,
        "title": product.title if product else "",
        "price": float(product.price) if product else 0.0,
        "currency": product.currency if product else "",
        "score": item.fused_score,
        "explanation": item.explanation,
    }
    if group is not None:
        payload["group"] = group
    return payload


def _timings_payload(turn_timings) -> list[dict]:
    return [{"stage": t.stage.value, "ms": t.duration_s * 1000.0} for t in turn_timings]


def _turn_payload(turn: ChatTurn, catalog) -> dict:
    group_of = {}
    for group in turn.groups:
        for pid in group["product_ids"]:
            group_of.setdefault(pid, group["title"])
    return {
        "reply": turn.text,
        "intent": turn.intent,
        "products": [_product_payload(item, catalog, group=group_of.get(item.product_id))
                     for item in turn.products],
        "groups": turn.groups,
        "timings": _timings_payload(turn.timings),
        "degraded": turn.degraded,
        **({"error_code": turn.error_code} if turn.error_code else {}),
    }


def create_app(state: AppState) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        if state.config.session_snapshot_path:
            try:
                state.sessions.snapshot(state.config.session_snapshot_path)
            except OSError as exc:
                logger.warning("session snapshot failed: %s", exc)

    app = FastAPI(title="shopagent", docs_url=None, redoc_url=None,
                  lifespan=lifespan)

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        return _error_response(exc.status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_request: Request, exc: RequestValidationError):
        return _error_response(400, "invalid_request", str(exc.errors()[:3]))

    @app.exception_handler(Exception)
    async def handle_unexpected(_request: Request, exc: Exception):
        logger.exception("unhandled error: %s", exc)
        return _error_response(500, "internal_error", "internal error")

    @app.middleware("http")
    async def check_api_key(request: Request, call_next):
        key = state.config.service_api_key
        if key and request.url.path != "/v1/health":
            if request.headers.get("X-API-Key") != key:
                return _error_response(401, "unauthorized", "missing or bad API key")
        return await call_next(request)

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "products": len(state.catalog),
            "catalog_generation": state.catalog.generation,
            "uptime_s": time.time() - state.started_at,
        }

    @app.post("/v1/sessions")
    def create_session():
        session = state.sessions.create()
        return {"session_id": session.session_id}

    @app.post("/v1/chat")
    def chat(body: ChatBody):
        if not body.message.strip():
            raise ApiError(400, "empty_message", "message must be non-empty")
        try:
            with state.sessions.locked(body.session_id) as session:
                turn = handle_turn(session, body.message, state)
                catalog, _ = state.snapshot()
                return _turn_payload(turn, catalog)
        except KeyError:
            raise ApiError(404, "unknown_session", f"no session {body.session_id!r}")

    @app.post("/v1/search")
    def search(body: SearchBody):
        if not body.query.strip():
            raise ApiError(400, "empty_query", "query must be non-empty")
        from .orchestrator import run_search_pipeline

        catalog, _ = state.snapshot()
        profile = state.profiles.get(body.profile_id) if body.profile_id else None
        run = run_search_pipeline(state, body.query, profile, k=body.k)
        if run.partial:
            logger.warning("search failed: %s", run.error)
            raise ApiError(502, "pipeline_error", run.error or "pipeline failed")

        stage1, candidates, ranked = run.result
        # each product's group is the category of the hypothetical that
        # scored it best
        group_of = {c.product_id: stage1.hypotheticals[c.best_source].category
                    for c in candidates}
        return {
            "trace_id": run.trace_id,
            "products": [
                _product_payload(item, catalog, group=group_of.get(item.product_id))
                for item in ranked.items
            ],
            "groups": [
                {"title": h.category, "note": h.relevance_note}
                for h in stage1.hypotheticals
            ],
            "timings": _timings_payload(run.timings),
        }

    @app.get("/v1/products/{product_id}")
    def get_product(product_id: str):
        catalog, _ = state.snapshot()
        product = lookup(catalog, product_id)
        if product is None:
            raise ApiError(404, "unknown_product", f"no product {product_id!r}")
        return {
            "id": product.id,
            "title": product.title,
            "description": product.description,
            "category": product.category,
            "brand": product.brand,
            "price": float(product.price),
            "currency": product.currency,
            "attributes": dict(product.attributes),
            "in_stock": product.in_stock,
        }

    @app.post("/v1/cart/{session_id}")
    def cart_add(session_id: str, body: CartBody):
        try:
            with state.sessions.locked(session_id) as session:
                catalog, _ = state.snapshot()
                product = lookup(catalog, body.ref)
                if product is None:
                    raise ApiError(404, "unknown_product", f"no product {body.ref!r}")
                if body.ref not in session.cart:
                    session.cart.append(body.ref)
                return {"cart": list(session.cart)}
        except KeyError:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")

    @app.post("/v1/admin/catalog/ingest")
    def ingest(body: IngestBody):
        if body.path is None and body.content is None:
            raise ApiError(400, "invalid_request", "provide path or content")
        source = body.path if body.path is not None else body.content.splitlines()
        try:
            report = state.reload_catalog(source)
        except Exception as exc:
            raise ApiError(400, "ingest_failed", str(exc))
        return {
            "accepted": report.accepted,
            "rejected": len(report.rejected),
            "rejections": [{"line": line, "reason": reason}
                           for line, reason in report.rejected[:50]],
            "catalog_generation": state.catalog.generation,
        }

    @app.post("/v1/feedback")
    def feedback(body: FeedbackBody):
        entry = {"session_id": body.session_id, "message": body.message,
                 "timestamp": time.time()}
        state.feedback.append(entry)
        return {"recorded": len(state.feedback)}

    @app.get("/v1/bench/report/{run_id}")
    def bench_report(run_id: str):
        if not run_id.replace("-", "").isalnum():
            raise ApiError(400, "invalid_request", "bad run id")
        path = Path(state.config.reports_dir) / f"{run_id}.json"
        if not path.exists():
            raise ApiError(404, "unknown_report", f"no bench report {run_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    return app
