from __future__ import annotations

import json

import pytest

from shopagent.catalog import ingest_catalog
from shopagent.errors import GroundingError
from shopagent.llm import StubBackend, StubScript, StubRule
from shopagent.personalization import UserProfile
from shopagent.ranking import RankWeights, llm_rerank, rank_top_k
from shopagent.retrieval import RetrievalResult


@pytest.fixture()
def mini_catalog():
    lines = []
    for pid, category, brand in [("A", "shoes/running", "Nike"),
                                 ("B", "shoes/running", "Brooks"),
                                 ("C", "electronics/power-banks", "Veho")]:
        lines.append(json.dumps({
            "id": pid, "title": f"{brand} product {pid}", "description": "d",
            "category": category, "brand": brand, "price": 10,
            "currency": "USD", "attributes": {}, "in_stock": True,
        }))
    handle, report = ingest_catalog(lines)
    assert not report.rejected
    return handle


def candidate(pid: str, score: float) -> RetrievalResult:
    return RetrievalResult(product_id=pid, score=score, sources=[0], best_source=0)


def test_empty_candidates_empty_list(mini_catalog):
    ranked = rank_top_k([], None, mini_catalog, 5)
    assert ranked.items == [] and not ranked.degraded


def test_hand_computed_fusion(mini_catalog):
    # brand-only affinity: B scores 0.5*0 + 0.5*1 = 0.5, A scores 0.
    profile = UserProfile(user_id="u", category_affinity={},
                          brand_affinity={"brooks": 1.0})
    ranked = rank_top_k([candidate("A", 0.9), candidate("B", 0.6)],
                        profile, mini_catalog, 2,
                        RankWeights(alpha=0.7, beta=0.3))
    by_id = {item.product_id: item for item in ranked.items}
    assert by_id["A"].fused_score == pytest.approx(0.7 * 0.9)          # 0.63
    assert by_id["B"].fused_score == pytest.approx(0.7 * 0.6 + 0.3 * 0.5)


def test_worked_example_b_ranks_first(mini_catalog):
    # affinity(C)=0.0, affinity(B)=1.0 (category 1.0 and brand 1.0):
    # C: 0.7*0.9 = 0.63 ; B: 0.7*0.6 + 0.3*1.0 = 0.72 -> B first.
    profile = UserProfile(user_id="u",
                          category_affinity={"shoes": 1.0},
                          brand_affinity={"brooks": 1.0})
    ranked = rank_top_k([candidate("C", 0.9), candidate("B", 0.6)],
                        profile, mini_catalog, 2, RankWeights(0.7, 0.3))
    assert [item.product_id for item in ranked.items] == ["B", "C"]
    assert ranked.items[0].fused_score == pytest.approx(0.72)
    assert ranked.items[1].fused_score == pytest.approx(0.63)


def test_beta_zero_preserves_retrieval_order(mini_catalog):
    profile = UserProfile(user_id="u",
                          category_affinity={"electronics": 1.0},
                          brand_affinity={"veho": 1.0})
    candidates = [candidate("B", 0.8), candidate("C", 0.5), candidate("A", 0.3)]
    ranked = rank_top_k(candidates, profile, mini_catalog, 3, RankWeights(1.0, 0.0))
    assert ranked.ids() == ["B", "C", "A"]


def test_negative_scores_clamped(mini_catalog):
    ranked = rank_top_k([candidate("A", -0.4)], None, mini_catalog, 1)
    item = ranked.items[0]
    assert item.fused_score == 0.0
    assert item.retrieval_score == -0.4  # raw score preserved for audit


def test_fused_in_unit_interval_and_ranks_contiguous(mini_catalog):
    profile = UserProfile(user_id="u", category_affinity={"shoes": 0.7},
                          brand_affinity={"nike": 0.9})
    ranked = rank_top_k([candidate("A", 1.2), candidate("B", 0.5),
                         candidate("C", -1.0)], profile, mini_catalog, 10)
    assert [item.rank for item in ranked.items] == [1, 2, 3]
    for item in ranked.items:
        assert 0.0 <= item.fused_score <= 1.0


def test_truncates_to_k(mini_catalog):
    candidates = [candidate(pid, 0.5) for pid in ("A", "B", "C")]
    ranked = rank_top_k(candidates, None, mini_catalog, 2)
    assert len(ranked.items) == 2


def test_unknown_id_is_loud_grounding_error(mini_catalog):
    with pytest.raises(GroundingError):
        rank_top_k([candidate("ghost", 0.5)], None, mini_catalog, 5)


def test_weights_validated():
    with pytest.raises(ValueError):
        RankWeights(0.7, 0.4)
    with pytest.raises(ValueError):
        RankWeights(-0.1, 1.1)


# --- llm_rerank -------------------------------------------------------------

def base_ranked(mini_catalog):
    return rank_top_k([candidate("A", 0.9), candidate("B", 0.6),
                       candidate("C", 0.3)], None, mini_catalog, 3)


def test_disabled_rerank_is_identity(mini_catalog):
    ranked = base_ranked(mini_catalog)
    assert llm_rerank(ranked, None, StubBackend(StubScript()), enabled=False) is ranked


def test_echo_rerank_keeps_order_adds_explanations(mini_catalog):
    ranked = base_ranked(mini_catalog)
    response = json.dumps([
        {"product_id": "A", "explanation": "best match"},
        {"product_id": "B", "explanation": "good value"},
        {"product_id": "C", "explanation": "alternative"},
    ])
    out = llm_rerank(ranked, None, StubBackend(StubScript(default_response=response)))
    assert out.ids() == ["A", "B", "C"]
    assert [item.explanation for item in out.items] == \
        ["best match", "good value", "alternative"]
    assert not out.degraded


def test_reversed_rerank_reassigns_ranks(mini_catalog):
    ranked = base_ranked(mini_catalog)
    response = json.dumps([{"product_id": pid} for pid in ("C", "B", "A")])
    out = llm_rerank(ranked, None, StubBackend(StubScript(default_response=response)))
    assert out.ids() == ["C", "B", "A"]
    assert [item.rank for item in out.items] == [1, 2, 3]


def test_invented_id_dropped(mini_catalog):
    ranked = base_ranked(mini_catalog)
    response = json.dumps([{"product_id": "ghost-1"}, {"product_id": "B"}])
    out = llm_rerank(ranked, None, StubBackend(StubScript(default_response=response)))
    assert "ghost-1" not in out.ids()
    assert out.ids() == ["B", "A", "C"]  # omitted ids appended in prior order
    assert any("ghost-1" in note for note in out.notes)


def test_gateway_failure_fails_open(mini_catalog):
    class DownBackend:
        tag = "down"

        def complete_text(self, request):
            from shopagent.errors import TransportError
            raise TransportError("no backend")

    ranked = base_ranked(mini_catalog)
    out = llm_rerank(ranked, None, DownBackend())
    assert out.ids() == ranked.ids()
    assert out.degraded


def test_empty_rerank_response_appends_everything(mini_catalog):
    ranked = base_ranked(mini_catalog)
    out = llm_rerank(ranked, None, StubBackend(StubScript(default_response="[]")))
    assert out.ids() == ranked.ids()
