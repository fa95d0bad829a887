"""Shared application state: catalog + index (atomically swappable),
gateway, profiles, sessions and the feedback log."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Optional, Union

from ..catalog import CatalogHandle, IngestReport, ingest_catalog
from ..embeddings import Embedder, VectorIndex, build_vector_index, embed_text
from ..llm import OpenAICompatBackend, StubBackend, load_stub_script
from ..llm.types import Backend
from ..personalization import UserProfile, load_profiles
from .config import AppConfig
from .sessions import SessionStore


@dataclass
class AppState:
    config: AppConfig
    gateway: Backend
    embedder: Embedder
    catalog: CatalogHandle
    vindex: VectorIndex
    profiles: dict[str, UserProfile] = field(default_factory=dict)
    sessions: SessionStore = field(default_factory=SessionStore)
    feedback: list[dict] = field(default_factory=list)
    started_at: float = field(default_factory=time.time)
    _swap_lock: threading.Lock = field(default_factory=threading.Lock)

    def snapshot(self) -> tuple[CatalogHandle, VectorIndex]:
        """Consistent (catalog, index) pair for one request; readers keep
        whatever generation they grabbed even across a reload."""
        with self._swap_lock:
            return self.catalog, self.vindex

    def reload_catalog(self, source) -> IngestReport:
        """Build a fresh catalog + index and swap both in atomically."""
        catalog, report = ingest_catalog(source)
        vindex = build_vector_index(catalog, self.embedder)
        with self._swap_lock:
            self.catalog = catalog
            self.vindex = vindex
        return report


def default_stub_script_path() -> Path:
    return Path(str(files("shopagent") / "data" / "stub_script.json"))


def make_gateway(config: AppConfig) -> Backend:
    if config.backend == "stub":
        script_path = config.stub_script_path or default_stub_script_path()
        return StubBackend(load_stub_script(script_path))
    if config.backend == "http":
        return OpenAICompatBackend(
            config.backend_url,
            api_key=config.api_key,
            model_tag=config.model_tag,
            timeout_s=config.timeout_s,
        )
    raise ValueError(f"unknown backend kind {config.backend!r}")


def build_state(
    config: AppConfig,
    *,
    catalog_source: Optional[Union[str, Path]] = None,
) -> AppState:
    source = catalog_source or config.catalog_path
    if source:
        catalog, report = ingest_catalog(source)
        if report.rejected:
            raise ValueError(
                f"catalog {source} has {len(report.rejected)} rejected lines; "
                f"first: {report.rejected[0]}"
            )
    else:
        catalog, _ = ingest_catalog([])
    vindex = build_vector_index(catalog, embed_text)
    profiles = load_profiles(config.profiles_path) if config.profiles_path else {}
    return AppState(
        config=config,
        gateway=make_gateway(config),
        embedder=embed_text,
        catalog=catalog,
        vindex=vindex,
        profiles=profiles,
    )
