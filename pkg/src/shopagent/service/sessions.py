"""In-memory session store with per-session serialization.

Turns are append-only; per-session operations run under a per-session
lock so concurrent appends to one session keep arrival order without
loss, while distinct sessions never contend.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from ..bench import StageTiming
from ..catalog import FilterConstraints
from ..ranking import RankedItem


@dataclass
class ChatTurn:
    role: str  # "user" | "agent"
    text: str
    intent: Optional[str] = None  # required on agent turns
    products: list[RankedItem] = field(default_factory=list)
    # hypothetical-category card groups: {"title", "note", "product_ids"}
    groups: list[dict] = field(default_factory=list)
    timings: list[StageTiming] = field(default_factory=list)
    degraded: bool = False
    error_code: Optional[str] = None
    # Hard constraints active when this turn's retrieval ran; kept so the
    # end-of-test grounding audit can re-check every surfaced product.
    constraints_snapshot: Optional[FilterConstraints] = None

    def __post_init__(self) -> None:
        if self.role not in ("user", "agent"):
            raise ValueError(f"turn role must be user or agent, got {self.role!r}")
        if self.role == "agent" and self.intent is None:
            raise ValueError("agent turns must carry an intent")


@dataclass
class Session:
    session_id: str
    user_id: Optional[str] = None
    turns: list[ChatTurn] = field(default_factory=list)
    extracted_constraints: FilterConstraints = field(default_factory=FilterConstraints)
    cart: list[str] = field(default_factory=list)
    created_at: float = field(default_factory=time.time)
    last_active: float = field(default_factory=time.time)

    def last_shown_products(self) -> list[RankedItem]:
        for turn in reversed(self.turns):
            if turn.role == "agent" and turn.products:
                return turn.products
        return []


class SessionStore:
    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def create(self, user_id: Optional[str] = None) -> Session:
        session_id = secrets.token_urlsafe(16)
        session = Session(session_id=session_id, user_id=user_id)
        with self._registry_lock:
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        return session

    def get(self, session_id: str) -> Optional[Session]:
        with self._registry_lock:
            return self._sessions.get(session_id)

    @contextmanager
    def locked(self, session_id: str):
        """Serialize an operation on one session; yields the session."""
        with self._registry_lock:
            session = self._sessions.get(session_id)
            lock = self._locks.get(session_id)
        if session is None or lock is None:
            raise KeyError(f"unknown session {session_id!r}")
        with lock:
            yield session
            session.last_active = time.time()

    def append(self, session_id: str, turn: ChatTurn) -> None:
        with self.locked(session_id) as session:
            session.turns.append(turn)

    def all_sessions(self) -> list[Session]:
        with self._registry_lock:
            return list(self._sessions.values())

    def snapshot(self, path: Union[str, Path]) -> None:
        """Optional JSONL persistence (one session per line), for shutdown."""
        with open(path, "w", encoding="utf-8") as fh:
            for session in self.all_sessions():
                fh.write(json.dumps({
                    "session_id": session.session_id,
                    "user_id": session.user_id,
                    "cart": session.cart,
                    "n_turns": len(session.turns),
                    "turns": [
                        {"role": t.role, "text": t.text, "intent": t.intent,
                         "product_ids": [p.product_id for p in t.products]}
                        for t in session.turns
                    ],
                }) + "\n")
