"""Offline user profiles from purchase history, and the affinity score.

The numeric core is deterministic: every purchase contributes
``0.5 ** (age_days / 90)`` (exponential recency decay, 90-day half-life)
to its category and brand, and each affinity map is max-normalized to 1.0.
An optional LLM call fills a free-text summary that is only ever injected
into prompts, never used numerically, so ranking stays auditable.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Optional, Union

from .catalog import Product, normalize_attribute
from .errors import ShopAgentError
from .llm import complete_chat
from .prompts import build_request

logger = logging.getLogger(__name__)

__all__ = [
    "PurchaseEvent",
    "UserProfile",
    "build_profile",
    "affinity",
    "load_events",
    "load_profiles",
    "save_profiles",
]

HALF_LIFE_DAYS = 90.0
CATEGORY_WEIGHT = 0.5
BRAND_WEIGHT = 0.5


def parse_timestamp(raw: str) -> datetime:
    """ISO-8601, 'Z' accepted; naive values are taken as UTC."""
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


@dataclass(frozen=True)
class PurchaseEvent:
    user_id: str
    product_id: str
    category: str
    brand: str
    price: Decimal
    currency: str
    timestamp: datetime

    def __post_init__(self) -> None:
        if not self.category:
            raise ValueError("purchase event category must be non-empty")


@dataclass
class UserProfile:
    user_id: str
    category_affinity: dict[str, float] = field(default_factory=dict)
    brand_affinity: dict[str, float] = field(default_factory=dict)
    demographics_note: str = ""
    llm_summary: Optional[str] = None
    built_at: Optional[datetime] = None


def _decay_weight(event_ts: datetime, now: datetime) -> float:
    age_days = max((now - event_ts).total_seconds(), 0.0) / 86400.0
    return 0.5 ** (age_days / HALF_LIFE_DAYS)


def _max_normalize(weights: dict[str, float]) -> dict[str, float]:
    if not weights:
        return {}
    top = max(weights.values())
    if top <= 0.0:
        return {key: 0.0 for key in weights}
    return {key: value / top for key, value in sorted(weights.items())}


def build_profile(
    events: list[PurchaseEvent],
    demographics: Optional[str] = None,
    *,
    now: Optional[datetime] = None,
    gateway=None,
    model: str = "default",
) -> UserProfile:
    """Deterministic profile from one user's events; the optional gateway
    fills ``llm_summary`` and its failure never fails the build."""
    now = now or datetime.now(timezone.utc)
    user_ids = {event.user_id for event in events}
    if len(user_ids) > 1:
        raise ValueError(f"events span multiple users: {sorted(user_ids)}")
    user_id = next(iter(user_ids)) if user_ids else ""

    category_weights: dict[str, float] = {}
    brand_weights: dict[str, float] = {}
    for event in events:
        weight = _decay_weight(event.timestamp, now)
        category = "/".join(
            normalize_attribute(seg) for seg in event.category.split("/") if seg.strip()
        )
        category_weights[category] = category_weights.get(category, 0.0) + weight
        brand = normalize_attribute(event.brand)
        if brand:
            brand_weights[brand] = brand_weights.get(brand, 0.0) + weight

    profile = UserProfile(
        user_id=user_id,
        category_affinity=_max_normalize(category_weights),
        brand_affinity=_max_normalize(brand_weights),
        demographics_note=demographics or "",
        built_at=now,
    )

    if gateway is not None:
        try:
            request = build_request(
                "profile.summary", model=model, profile=profile_prompt_text(profile),
            )
            profile.llm_summary = complete_chat(gateway, request).raw_text.strip() or None
        except ShopAgentError as exc:
            logger.warning("profile summary call failed for %s: %s", user_id or "<anon>", exc)

    return profile


def profile_prompt_text(profile: Optional[UserProfile]) -> str:
    """Serialization of a profile for prompt injection ("none" when absent)."""
    if profile is None:
        return "none"
    payload = {
        "category_affinity": profile.category_affinity,
        "brand_affinity": profile.brand_affinity,
    }
    if profile.demographics_note:
        payload["demographics"] = profile.demographics_note
    if profile.llm_summary:
        payload["summary"] = profile.llm_summary
    return json.dumps(payload, sort_keys=True)


def _category_prefixes(category: str) -> Iterable[str]:
    segments = category.split("/")
    for end in range(1, len(segments) + 1):
        yield "/".join(segments[:end])


def affinity(profile: Optional[UserProfile], product: Product) -> float:
    """Blend of the best category-prefix weight and the brand weight,
    0.5/0.5; always in [0, 1]."""
    if profile is None:
        return 0.0
    best_category = max(
        (profile.category_affinity.get(prefix, 0.0)
         for prefix in _category_prefixes(product.category)),
        default=0.0,
    )
    brand = profile.brand_affinity.get(normalize_attribute(product.brand), 0.0)
    return CATEGORY_WEIGHT * best_category + BRAND_WEIGHT * brand


def load_events(path: Union[str, Path]) -> list[PurchaseEvent]:
    """Purchase-history JSONL: one event object per line."""
    events = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        events.append(PurchaseEvent(
            user_id=obj["user_id"],
            product_id=obj.get("product_id", ""),
            category=obj["category"],
            brand=obj.get("brand", ""),
            price=Decimal(str(obj.get("price", "0"))),
            currency=obj.get("currency", "USD"),
            timestamp=parse_timestamp(obj["timestamp"]),
        ))
    return events


def save_profiles(profiles: Iterable[UserProfile], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for profile in profiles:
            fh.write(json.dumps({
                "user_id": profile.user_id,
                "category_affinity": profile.category_affinity,
                "brand_affinity": profile.brand_affinity,
                "demographics_note": profile.demographics_note,
                "llm_summary": profile.llm_summary,
                "built_at": profile.built_at.isoformat() if profile.built_at else None,
            }, sort_keys=True) + "\n")


def load_profiles(path: Union[str, Path]) -> dict[str, UserProfile]:
    profiles = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        profiles[obj["user_id"]] = UserProfile(
            user_id=obj["user_id"],
            category_affinity=obj.get("category_affinity", {}),
            brand_affinity=obj.get("brand_affinity", {}),
            demographics_note=obj.get("demographics_note", ""),
            llm_summary=obj.get("llm_summary"),
            built_at=parse_timestamp(obj["built_at"]) if obj.get("built_at") else None,
        )
    return profiles
