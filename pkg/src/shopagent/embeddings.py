"""Deterministic reference embedder and an exact cosine k-NN index.

The reference embedder is signed feature hashing over unigrams and
adjacent bigrams: tokens are hashed with 64-bit FNV-1a, the bucket is
``hash mod 256`` and the sign comes from bit 63, then the vector is
L2-normalized.  It is dependency-free and bit-exact, which makes the
retrieval layer fully oracle-testable; production-grade embedders plug in
behind the same callable interface (text -> vector).

The index is an exact linear scan.  At desk scale (<= 100k products)
exactness is cheap and keeps the brute-force oracle contract crisp.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Union

import numpy as np

from .catalog import CatalogHandle

__all__ = [
    "DIM",
    "EMBEDDER_TAG",
    "Embedder",
    "VectorIndex",
    "embed_text",
    "cosine_similarity",
    "build_vector_index",
    "knn",
    "save_index",
    "load_index",
]

DIM = 256
EMBEDDER_TAG = "fnv1a-signed-hash-256-v1"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")

Embedder = Callable[[str], np.ndarray]


def _fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def embed_text(text: str) -> np.ndarray:
    """Embed text deterministically; empty token stream gives the zero vector.

    Features are the unigrams plus adjacent bigrams (joined with a single
    space) of the lowercased, non-alphanumeric-split token stream.
    """
    vec = np.zeros(DIM, dtype=np.float64)
    tokens = _tokenize(text)
    features = list(tokens)
    features.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    for feat in features:
        h = _fnv1a_64(feat.encode("utf-8"))
        bucket = h % DIM
        sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    return vec


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Standard cosine in [-1, 1]; zero vectors compare as 0 by definition.

    The arithmetic (dot, then divide by the product of sqrt-of-self-dot
    norms) is the canonical scoring formula: every scorer in the package
    uses this exact operation order so that mathematically equal scores
    are bit-equal too, keeping (score, id) orderings stable across
    independent implementations.
    """
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = math.sqrt(float(np.dot(a, a)))
    nb = math.sqrt(float(np.dot(b, b)))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b)) / (na * nb)


@dataclass
class VectorIndex:
    """Immutable per-product vectors; one row per product id."""

    ids: list[str]
    vectors: np.ndarray  # shape (n, DIM)
    dim: int
    embedder_tag: str
    catalog_generation: int

    def __len__(self) -> int:
        return len(self.ids)


def indexed_text(product) -> str:
    """Text a product is indexed under: title, space-joined category
    segments, description, then attribute values sorted by name."""
    parts = [product.title, product.category.replace("/", " "), product.description]
    parts.extend(value for _, value in sorted(product.attributes.items()))
    return " ".join(parts)


def build_vector_index(
    catalog: CatalogHandle,
    embedder: Embedder = embed_text,
    *,
    embedder_tag: str = EMBEDDER_TAG,
) -> VectorIndex:
    ids = sorted(catalog.products.keys())
    if ids:
        vectors = np.stack([embedder(indexed_text(catalog.products[pid])) for pid in ids])
    else:
        vectors = np.zeros((0, DIM), dtype=np.float64)
    return VectorIndex(
        ids=ids,
        vectors=vectors,
        dim=DIM,
        embedder_tag=embedder_tag,
        catalog_generation=catalog.generation,
    )


def knn(
    index: VectorIndex,
    query: np.ndarray,
    k: int,
    allow: Optional[Iterable[str]] = None,
) -> list[tuple[str, float]]:
    """Exact top-k by cosine, sorted (score desc, id asc); k=0 gives [].

    ``allow`` restricts candidates to the given ids; scores of surviving
    entries are unaffected by what else is allowed.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if query.shape != (index.dim,):
        raise ValueError(f"query dimension {query.shape} != index dim {index.dim}")
    if k == 0 or len(index) == 0:
        return []

    allow_set = set(allow) if allow is not None else None
    scored = []
    for row, pid in enumerate(index.ids):
        if allow_set is not None and pid not in allow_set:
            continue
        scored.append((pid, cosine_similarity(query, index.vectors[row])))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]


_INDEX_FORMAT_VERSION = 1


def save_index(index: VectorIndex, path: Union[str, Path]) -> None:
    payload = {
        "version": _INDEX_FORMAT_VERSION,
        "dim": index.dim,
        "embedder_tag": index.embedder_tag,
        "catalog_generation": index.catalog_generation,
        "entries": [[pid, index.vectors[i].tolist()] for i, pid in enumerate(index.ids)],
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_index(path: Union[str, Path], *, expect_tag: str = EMBEDDER_TAG) -> VectorIndex:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != _INDEX_FORMAT_VERSION:
        raise ValueError(f"unsupported index format version: {payload.get('version')}")
    if payload["embedder_tag"] != expect_tag:
        raise ValueError(
            f"index built with embedder {payload['embedder_tag']!r}, expected {expect_tag!r}"
        )
    ids = [entry[0] for entry in payload["entries"]]
    if ids:
        vectors = np.array([entry[1] for entry in payload["entries"]], dtype=np.float64)
    else:
        vectors = np.zeros((0, payload["dim"]), dtype=np.float64)
    return VectorIndex(
        ids=ids,
        vectors=vectors,
        dim=payload["dim"],
        embedder_tag=payload["embedder_tag"],
        catalog_generation=payload["catalog_generation"],
    )
