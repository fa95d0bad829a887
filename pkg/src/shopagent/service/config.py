"""Service configuration: JSON config file plus environment overrides.

Documented keys (all optional, defaults below): backend ("stub"|"http"),
backend_url, api_key, model_tag, model_tags (per-stage overrides keyed by
"stage1"/"rerank"/"intent"/"smalltalk"/"eval"), timeout_ms, catalog_path,
stub_script_path, profiles_path, rank_alpha, rank_beta, k_per_hyp,
k_final, top_k, rerank_enabled, reports_dir, session_snapshot_path,
service_api_key, host, port.

Environment overrides: BACKEND_URL, API_KEY, MODEL_TAG, TIMEOUT_MS target
the LLM backend; SHOPAGENT_BACKEND, SHOPAGENT_CATALOG,
SHOPAGENT_SERVICE_API_KEY override their config-file counterparts.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping, Optional, Union


@dataclass
class AppConfig:
    backend: str = "stub"
    backend_url: str = ""
    api_key: str = ""
    model_tag: str = "default"
    # per-stage overrides, e.g. {"stage1": "tuned-8b", "rerank": "large"};
    # anything unset falls back to model_tag
    model_tags: dict = field(default_factory=dict)
    timeout_ms: int = 30000
    catalog_path: str = ""
    stub_script_path: str = ""  # empty -> packaged demo script
    profiles_path: str = ""
    rank_alpha: float = 0.7
    rank_beta: float = 0.3
    k_per_hyp: int = 10
    k_final: int = 20
    top_k: int = 20
    rerank_enabled: bool = False
    reports_dir: str = "reports"
    session_snapshot_path: str = ""  # JSONL dump of sessions on shutdown
    service_api_key: str = ""  # empty disables API-key auth
    host: str = "127.0.0.1"
    port: int = 8940

    @property
    def timeout_s(self) -> float:
        return self.timeout_ms / 1000.0

    def model_for(self, stage: str) -> str:
        return self.model_tags.get(stage, self.model_tag)


_ENV_MAP = {
    "BACKEND_URL": "backend_url",
    "API_KEY": "api_key",
    "MODEL_TAG": "model_tag",
    "TIMEOUT_MS": "timeout_ms",
    "SHOPAGENT_BACKEND": "backend",
    "SHOPAGENT_CATALOG": "catalog_path",
    "SHOPAGENT_SERVICE_API_KEY": "service_api_key",
}


def load_config(
    path: Optional[Union[str, Path]] = None,
    env: Optional[Mapping[str, str]] = None,
) -> AppConfig:
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(AppConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(raw)
    for env_key, field_name in _ENV_MAP.items():
        if env_key in env:
            values[field_name] = env[env_key]
    config = AppConfig(**values)
    config.timeout_ms = int(config.timeout_ms)
    config.port = int(config.port)
    return config
