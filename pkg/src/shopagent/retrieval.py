"""Grounded retrieval: embed each hypothetical, k-NN under hard filters,
merge and dedupe.

Hard constraints are applied as an allow-set *before* scoring, so every
returned candidate is a real, in-constraint catalog product by
construction.  Duplicates across hypotheticals keep their max score (a
product should not win merely by matching many near-identical
hypotheticals) with the union of contributing sources.

``brute_force_retrieve`` reimplements the whole contract as plain full
scans with its own filtering, cosine and merge code; it exists purely as
the correctness oracle for ``retrieve``.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field

import numpy as np

from .catalog import CatalogHandle, Product, normalize_attribute
from .embeddings import Embedder, VectorIndex, knn
from .query_pipeline import Stage1Output

__all__ = [
    "RetrievalResult",
    "retrieve",
    "brute_force_retrieve",
    "merge_candidates",
    "DEFAULT_K_PER_HYP",
    "DEFAULT_K_FINAL",
]

DEFAULT_K_PER_HYP = 10
DEFAULT_K_FINAL = 20


@dataclass
class RetrievalResult:
    product_id: str
    score: float  # max cosine over contributing hypotheticals
    sources: list[int] = field(default_factory=list)  # hypothetical indices, ascending
    best_source: int = 0  # index of the hypothetical that achieved the max
    passed_hard_filter: bool = True


def merge_candidates(
    per_hyp: list[tuple[int, list[tuple[str, float]]]],
) -> list[RetrievalResult]:
    """Max-score dedupe with source union, ordered (score desc, id asc)."""
    merged: dict[str, RetrievalResult] = {}
    for hyp_index, scored in per_hyp:
        for product_id, score in scored:
            existing = merged.get(product_id)
            if existing is None:
                merged[product_id] = RetrievalResult(
                    product_id=product_id, score=score,
                    sources=[hyp_index], best_source=hyp_index,
                )
            else:
                if hyp_index not in existing.sources:
                    existing.sources.append(hyp_index)
                if score > existing.score:
                    existing.score = score
                    existing.best_source = hyp_index
    results = sorted(merged.values(), key=lambda r: (-r.score, r.product_id))
    for result in results:
        result.sources.sort()
    return results


def retrieve(
    stage1: Stage1Output,
    catalog: CatalogHandle,
    vindex: VectorIndex,
    embedder: Embedder,
    k_per_hyp: int = DEFAULT_K_PER_HYP,
    k_final: int = DEFAULT_K_FINAL,
) -> list[RetrievalResult]:
    """Indexed retrieval under the stage-1 hard constraints.

    An empty allow-set signals unsatisfiable constraints and yields an
    empty result, not an error; a catalog/index generation mismatch is a
    real error.
    """
    if vindex.catalog_generation != catalog.generation:
        raise ValueError(
            f"index generation {vindex.catalog_generation} does not match "
            f"catalog generation {catalog.generation}"
        )
    from .catalog import filter_products  # local: keeps module deps one-way

    allow = filter_products(catalog, stage1.structured_query.hard_constraints)
    if not allow:
        return []

    per_hyp = []
    for hyp_index, hyp in enumerate(stage1.hypotheticals):
        query_vec = embedder(hyp.query_text())
        per_hyp.append((hyp_index, knn(vindex, query_vec, k_per_hyp, allow)))
    return merge_candidates(per_hyp)[:k_final]


# --- independent oracle implementation below; intentionally shares no
# --- filtering/scoring/merge code with the indexed path.

def _oracle_passes(product: Product, hc) -> bool:
    if hc.in_stock_only and not product.in_stock:
        return False
    if hc.category_prefix:
        prefix = "/".join(
            normalize_attribute(s) for s in hc.category_prefix.split("/") if s.strip()
        )
        if prefix:
            segments = product.category.split("/")
            wanted = prefix.split("/")
            if segments[:len(wanted)] != wanted:
                return False
    for name, value in hc.attribute_equals:
        if product.attributes.get(normalize_attribute(name)) != normalize_attribute(value):
            return False
    if hc.price_min is not None and product.price < hc.price_min:
        return False
    if hc.price_max is not None and product.price > hc.price_max:
        return False
    return True


def _oracle_text(product: Product) -> str:
    pieces = [product.title, product.category.replace("/", " "), product.description]
    for _, value in sorted(product.attributes.items()):
        pieces.append(value)
    return " ".join(pieces)


def _oracle_cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = math.sqrt(float(np.dot(a, a)))
    nb = math.sqrt(float(np.dot(b, b)))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b)) / (na * nb)


def brute_force_retrieve(
    stage1: Stage1Output,
    catalog: CatalogHandle,
    embedder: Embedder,
    k_per_hyp: int = DEFAULT_K_PER_HYP,
    k_final: int = DEFAULT_K_FINAL,
) -> list[RetrievalResult]:
    """Same contract as :func:`retrieve`, as unindexed full scans."""
    hc = stage1.structured_query.hard_constraints
    survivors = [p for p in catalog.products.values() if _oracle_passes(p, hc)]
    if not survivors:
        return []
    product_vectors = [(p.id, embedder(_oracle_text(p))) for p in survivors]

    best: dict[str, tuple[float, list[int], int]] = {}
    for hyp_index, hyp in enumerate(stage1.hypotheticals):
        query_vec = embedder(f"{hyp.category} {hyp.specific_item} {hyp.generic_item}")
        scored = [(pid, _oracle_cosine(query_vec, vec)) for pid, vec in product_vectors]
        scored.sort(key=lambda item: (-item[1], item[0]))
        for pid, score in scored[:k_per_hyp]:
            if pid not in best:
                best[pid] = (score, [hyp_index], hyp_index)
            else:
                prev_score, sources, prev_best = best[pid]
                if hyp_index not in sources:
                    sources = sources + [hyp_index]
                if score > prev_score:
                    best[pid] = (score, sources, hyp_index)
                else:
                    best[pid] = (prev_score, sources, prev_best)

    results = [
        RetrievalResult(product_id=pid, score=score, sources=sorted(sources),
                        best_source=best_source)
        for pid, (score, sources, best_source) in best.items()
    ]
    results.sort(key=lambda r: (-r.score, r.product_id))
    return results[:k_final]
