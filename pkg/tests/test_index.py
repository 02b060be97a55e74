import numpy as np
import pytest

from signalforge.errors import EmptyText, UnknownStrategy
from signalforge.index import (
    EMBEDDING_DIM,
    IndexEntry,
    SignalIndex,
    build_index,
    cosine,
    embed,
)


def test_embedding_is_unit_norm_and_deterministic():
    vector = embed("front wiper speed")
    assert vector.shape == (EMBEDDING_DIM,)
    assert np.linalg.norm(vector) == pytest.approx(1.0, abs=1e-9)
    assert cosine(vector, embed("front wiper speed")) == pytest.approx(1.0, abs=1e-9)


def test_disjoint_token_sets_are_orthogonal():
    # Fixture tokens chosen to avoid hash-bucket collisions.
    assert cosine(embed("alpha beta"), embed("gamma delta")) == pytest.approx(0.0)


def test_token_order_does_not_matter():
    # Bag-of-tokens oracle: same multiset -> identical vector.
    assert cosine(
        embed("wiper speed front"), embed("front wiper speed")
    ) == pytest.approx(1.0, abs=1e-9)


def test_embed_rejects_empty():
    with pytest.raises(EmptyText):
        embed("   ")


def test_self_query_returns_similarity_one():
    index = SignalIndex()
    vector = embed("battery voltage level")
    index.insert(IndexEntry("BatV", "original_description", vector, "battery voltage level"))
    assert index.query_top_k(vector, 1, "original_description") == [
        ("BatV", pytest.approx(1.0))
    ]


def test_k_clamped_to_index_size():
    index = SignalIndex()
    for name in ("A", "B", "C"):
        index.insert(
            IndexEntry(name, "original_description", embed(f"token{name}"), f"token{name}")
        )
    assert len(index.query_top_k(embed("tokenA"), 5, "original_description")) == 3


def test_ranking_matches_brute_force_oracle():
    texts = {
        "S0": "front wiper speed level",
        "S1": "rear wiper speed level",
        "S2": "front washer fluid level",
        "S3": "battery charge percent",
        "S4": "cabin air temperature",
        "S5": "front left door open",
        "S6": "wiper park position",
        "S7": "vehicle road speed",
        "S8": "fuel tank level percent",
        "S9": "front axle load",
    }
    index = SignalIndex()
    for name, text in texts.items():
        index.insert(IndexEntry(name, "original_description", embed(text), text))
    query = embed("front wiper speed")
    got = index.query_top_k(query, 10, "original_description")
    # Exhaustive oracle.
    expected = sorted(
        ((name, cosine(query, embed(text))) for name, text in texts.items()),
        key=lambda pair: (-pair[1], pair[0]),
    )
    assert [name for name, _ in got] == [name for name, _ in expected]
    for (_, sim_got), (_, sim_expected) in zip(got, expected):
        assert sim_got == pytest.approx(sim_expected, abs=1e-12)


def test_insert_order_does_not_change_results():
    entries = [
        IndexEntry(f"S{i}", "original_description", embed(f"text number {i}"), f"text number {i}")
        for i in range(8)
    ]
    forward, backward = SignalIndex(), SignalIndex()
    for entry in entries:
        forward.insert(entry)
    for entry in reversed(entries):
        backward.insert(entry)
    query = embed("text number 3")
    assert forward.query_top_k(query, 8, "original_description") == backward.query_top_k(
        query, 8, "original_description"
    )


def test_unknown_strategy_rejected():
    index = SignalIndex()
    with pytest.raises(UnknownStrategy):
        index.query_top_k(embed("x"), 1, "mystery")


def test_build_index_covers_catalog(small_catalog):
    for strategy in ("raw_code", "original_description", "rewritten_description"):
        index = build_index(small_catalog, strategy)
        assert index.size(strategy) == len(small_catalog)


def test_index_document_roundtrip(small_catalog):
    index = build_index(small_catalog, "rewritten_description")
    restored = SignalIndex.from_document(index.to_document())
    query = embed("wiper state")
    assert index.query_top_k(query, 3, "rewritten_description") == restored.query_top_k(
        query, 3, "rewritten_description"
    )
