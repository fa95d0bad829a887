"""Agent layer: orchestrator, session memory, HTTP API and app state."""

from .config import AppConfig, load_config
from .sessions import ChatTurn, Session, SessionStore
from .orchestrator import Intent, classify_intent, handle_turn, run_search_pipeline
from .state import AppState, build_state
from .app import create_app

__all__ = [
    "AppConfig",
    "load_config",
    "ChatTurn",
    "Session",
    "SessionStore",
    "Intent",
    "classify_intent",
    "handle_turn",
    "run_search_pipeline",
    "AppState",
    "build_state",
    "create_app",
]
