from __future__ import annotations

import random
import re

import numpy as np
import pytest

from shopagent.catalog import ingest_catalog
from shopagent.embeddings import (
    DIM,
    EMBEDDER_TAG,
    build_vector_index,
    cosine_similarity,
    embed_text,
    indexed_text,
    knn,
    load_index,
    save_index,
)


# Independent re-implementation of the hashing recipe, written as the
# oracle: different tokenization/loop structure, same stated contract.
def oracle_embed(text: str) -> np.ndarray:
    words = re.findall(r"[0-9a-z]+", text.lower())
    feats = []
    for i, w in enumerate(words):
        feats.append(w)
        if i + 1 < len(words):
            feats.append(w + " " + words[i + 1])
    out = np.zeros(256)
    for feat in feats:
        h = 14695981039346656037
        for b in feat.encode("utf-8"):
            h = ((h ^ b) * 1099511628211) % (2 ** 64)
        sign = 1.0 if h < 2 ** 63 else -1.0
        out[h % 256] += sign
    n = np.sqrt((out * out).sum())
    return out / n if n else out


def test_empty_text_is_zero_vector():
    vec = embed_text("")
    assert vec.shape == (DIM,)
    assert not vec.any()


def test_punctuation_only_is_zero_vector():
    assert not embed_text("!!! --- ???").any()


def test_determinism_bit_exact():
    a = embed_text("power bank 10000mAh")
    b = embed_text("power bank 10000mAh")
    assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("text", [
    "power bank 10000mAh",
    "Heated Tech Gloves Vertex II",
    "a",
    "USB-C  charger,   fast!",
    "café crema",
])
def test_matches_independent_oracle(text):
    np.testing.assert_array_equal(embed_text(text), oracle_embed(text))


def test_outputs_are_unit_norm():
    for text in ["running shoes", "x", "the quick brown fox"]:
        assert abs(np.linalg.norm(embed_text(text)) - 1.0) < 1e-6


def test_cosine_identities():
    v = embed_text("ski goggles")
    assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-9)
    assert cosine_similarity(v, -v) == pytest.approx(-1.0, abs=1e-9)


def test_cosine_orthonormal_basis():
    e1 = np.zeros(4); e1[0] = 1.0
    e2 = np.zeros(4); e2[1] = 1.0
    assert cosine_similarity(e1, e2) == 0.0


def test_cosine_zero_vector_is_zero():
    v = embed_text("anything")
    assert cosine_similarity(np.zeros(DIM), v) == 0.0


def test_cosine_dimension_mismatch():
    with pytest.raises(ValueError):
        cosine_similarity(np.zeros(3), np.zeros(4))


def test_empty_catalog_empty_index():
    empty, _ = ingest_catalog([])
    index = build_vector_index(empty)
    assert len(index) == 0 and index.vectors.shape == (0, DIM)


def test_fixture_index_shape(vindex):
    assert len(vindex) == 500
    assert vindex.vectors.shape == (500, DIM)
    assert vindex.embedder_tag == EMBEDDER_TAG


def test_rebuild_is_identical(catalog, vindex):
    again = build_vector_index(catalog)
    assert again.ids == vindex.ids
    assert again.vectors.tobytes() == vindex.vectors.tobytes()


def test_self_retrieval_is_rank_one(catalog, vindex):
    product = catalog.products["P0007"]
    query = embed_text(indexed_text(product))
    top = knn(vindex, query, 1)
    assert top[0][0] == "P0007"
    assert top[0][1] == pytest.approx(1.0, abs=1e-6)


def test_k_zero_is_empty(vindex):
    assert knn(vindex, embed_text("x"), 0) == []


def test_k_larger_than_catalog_returns_everything_sorted(vindex):
    result = knn(vindex, embed_text("camera"), 10_000)
    assert len(result) == 500
    assert all(result[i][1] >= result[i + 1][1] for i in range(len(result) - 1))


def knn_oracle(vindex, query, k, allow=None):
    scored = []
    for i, pid in enumerate(vindex.ids):
        if allow is not None and pid not in allow:
            continue
        scored.append((pid, cosine_similarity(query, vindex.vectors[i])))
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]


def test_knn_matches_brute_force_oracle(vindex):
    rng = random.Random(7)
    words = ["ski", "camera", "power", "bank", "running", "shoes", "kitchen",
             "gloves", "knife", "jacket", "blue", "usb", "charger", "book"]
    for _ in range(25):
        text = " ".join(rng.choices(words, k=rng.randint(1, 5)))
        query = embed_text(text)
        k = rng.choice([1, 3, 10, 50])
        got = knn(vindex, query, k)
        expected = knn_oracle(vindex, query, k)
        assert [pid for pid, _ in got] == [pid for pid, _ in expected]
        for (_, s1), (_, s2) in zip(got, expected):
            assert s1 == pytest.approx(s2, abs=1e-9)


def test_knn_results_are_prefix_of_larger_k(vindex):
    query = embed_text("wireless headphones")
    small = knn(vindex, query, 5)
    large = knn(vindex, query, 25)
    assert large[:5] == small


def test_allow_set_restricts_without_changing_scores(vindex):
    query = embed_text("power bank")
    full = dict(knn(vindex, query, 500))
    allow = set(list(full)[:40])
    restricted = knn(vindex, query, 10, allow=allow)
    assert {pid for pid, _ in restricted} <= allow
    for pid, score in restricted:
        assert score == full[pid]


def test_zero_query_scores_zero_everywhere(vindex):
    result = knn(vindex, np.zeros(DIM), 3)
    assert [s for _, s in result] == [0.0, 0.0, 0.0]
    # ties broken by ascending id
    assert [pid for pid, _ in result] == sorted(pid for pid, _ in result)


def test_query_dimension_checked(vindex):
    with pytest.raises(ValueError):
        knn(vindex, np.zeros(5), 3)


def test_index_round_trip(tmp_path, vindex):
    path = tmp_path / "index.json"
    save_index(vindex, path)
    loaded = load_index(path)
    assert loaded.ids == vindex.ids
    assert np.array_equal(loaded.vectors, vindex.vectors)
    assert loaded.catalog_generation == vindex.catalog_generation


def test_index_load_rejects_wrong_embedder(tmp_path, vindex):
    path = tmp_path / "index.json"
    save_index(vindex, path)
    with pytest.raises(ValueError, match="embedder"):
        load_index(path, expect_tag="some-other-embedder")
