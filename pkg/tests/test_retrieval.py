import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contraqa.corpus import Corpus, Tweet
from contraqa.errors import IndexFormatError
from contraqa.retrieval import (
    DenseIndex,
    HashingEmbeddingProvider,
    bm25_search,
    build_dense_index,
    build_index,
    dense_search,
    load_index,
    save_index,
    tokenize,
)

from oracles import bm25_scores_direct, dense_order_direct


def corpus_of(*texts):
    return Corpus([Tweet(id=f"d{i}", text=text) for i, text in enumerate(texts)])


class TestTokenize:
    def test_punctuation_boundaries(self):
        assert tokenize("Shoes spread COVID-19!") == ["shoes", "spread", "covid", "19"]

    def test_empty(self):
        assert tokenize("") == []

    def test_duplicates_preserved(self):
        assert tokenize("covid covid") == ["covid", "covid"]

    def test_underscore_is_a_boundary(self):
        assert tokenize("a_b") == ["a", "b"]


class TestBuildIndex:
    def test_avg_doc_length(self):
        corpus = corpus_of("one two", "one two three four", "one two three four five six")
        index = build_index(corpus)
        assert index.avg_doc_length == 4.0

    def test_absent_term_has_no_postings(self):
        index = build_index(corpus_of("one two", "two three"))
        assert "zebra" not in index.postings

    def test_rebuild_is_identical(self):
        corpus = corpus_of("alpha beta", "beta gamma", "gamma alpha")
        assert build_index(corpus) == build_index(corpus)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_index(Corpus([]))

    def test_postings_sorted_by_position(self):
        index = build_index(corpus_of("shared one", "only here", "shared two"))
        positions = [pos for pos, _ in index.postings["shared"]]
        assert positions == sorted(positions)


class TestBM25Search:
    def test_single_match_ranked_first(self):
        index = build_index(corpus_of("shoes spread covid"))
        results = bm25_search(index, "shoes", k=5)
        assert [r.tweet_id for r in results] == ["d0"]

    def test_no_match_returns_empty(self):
        index = build_index(corpus_of("shoes spread covid"))
        assert bm25_search(index, "zebra", k=5) == []

    def test_empty_query_returns_empty(self):
        index = build_index(corpus_of("shoes spread covid"))
        assert bm25_search(index, "...", k=5) == []

    def test_matches_direct_formula_oracle(self):
        texts = [
            "shoes spread covid fast",
            "covid spreads through water",
            "running shoes are comfortable shoes",
        ]
        corpus = corpus_of(*texts)
        index = build_index(corpus)
        query = "shoes covid"
        oracle = bm25_scores_direct([tokenize(t) for t in texts], tokenize(query), index.k1, index.b)
        results = {r.tweet_id: r.score for r in bm25_search(index, query, k=10)}
        for i, expected in enumerate(oracle):
            if expected > 0:
                assert results[f"d{i}"] == pytest.approx(expected, abs=1e-9)
            else:
                assert f"d{i}" not in results

    def test_scores_non_increasing_and_positive(self):
        corpus = corpus_of("a b c", "a b", "a", "b c d", "d e f")
        index = build_index(corpus)
        results = bm25_search(index, "a b", k=10)
        scores = [r.score for r in results]
        assert all(s > 0 for s in scores)
        assert scores == sorted(scores, reverse=True)

    def test_truncation_prefix_property(self):
        corpus = corpus_of("a b", "a c", "a d", "a e", "b c")
        index = build_index(corpus)
        full = bm25_search(index, "a b", k=5)
        for k in range(1, 6):
            assert bm25_search(index, "a b", k=k) == full[:k]

    def test_ties_broken_by_ascending_id(self):
        # Identical docs score identically; order must follow tweet id.
        corpus = Corpus([
            Tweet(id="z9", text="same words here"),
            Tweet(id="a1", text="same words here too"),
        ])
        index = build_index(corpus)
        results = bm25_search(index, "nothing", k=2)
        assert results == []
        # Two docs with equal length and tf for the query term tie exactly.
        corpus = Corpus([
            Tweet(id="z9", text="match alpha"),
            Tweet(id="a1", text="match beta"),
        ])
        index = build_index(corpus)
        results = bm25_search(index, "match", k=2)
        assert [r.tweet_id for r in results] == ["a1", "z9"]
        assert results[0].score == results[1].score


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.lists(st.sampled_from("abcdef"), min_size=1, max_size=6).map(" ".join),
        min_size=1,
        max_size=8,
    ),
    st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=4).map(" ".join),
)
def test_bm25_random_corpora_match_oracle(texts, query):
    corpus = Corpus([Tweet(id=f"d{i}", text=t) for i, t in enumerate(texts)])
    index = build_index(corpus)
    oracle = bm25_scores_direct([tokenize(t) for t in texts], tokenize(query), index.k1, index.b)
    got = {r.tweet_id: r.score for r in bm25_search(index, query, k=len(texts))}
    for i, expected in enumerate(oracle):
        if expected > 0:
            assert got[f"d{i}"] == pytest.approx(expected, abs=1e-9)
        else:
            assert f"d{i}" not in got


class TestIndexPersistence:
    def test_roundtrip_identical(self, tmp_path):
        corpus = corpus_of("alpha beta gamma", "beta gamma delta", "delta alpha")
        index = build_index(corpus, k1=1.1, b=0.35)
        path = tmp_path / "index.json.gz"
        save_index(index, path)
        assert load_index(path) == index

    def test_version_tag_checked(self, tmp_path):
        import gzip
        import json

        path = tmp_path / "index.json.gz"
        with gzip.open(path, "wt") as fh:
            json.dump({"format": "something-else", "version": 99}, fh)
        with pytest.raises(IndexFormatError):
            load_index(path)


class FixedProvider:
    def __init__(self, table, dim):
        self.table = table
        self.dim = dim

    def embed(self, texts):
        return np.array([self.table[t] for t in texts], dtype=np.float64)


class TestDenseSearch:
    def test_exact_row_match_is_rank_one(self):
        corpus = corpus_of("aa", "bb", "cc")
        table = {"aa": [1.0, 0.0, 0.0], "bb": [0.0, 1.0, 0.0], "cc": [0.0, 0.0, 1.0], "q": [0.0, 1.0, 0.0]}
        provider = FixedProvider(table, 3)
        index = build_dense_index(corpus, provider)
        results = dense_search(index, provider, "q", k=1)
        assert results[0].tweet_id == "d1"

    def test_k_beyond_doc_count_returns_all(self):
        corpus = corpus_of("aa", "bb")
        table = {"aa": [1.0, 0.0], "bb": [0.5, 0.5], "q": [1.0, 1.0]}
        provider = FixedProvider(table, 2)
        index = build_dense_index(corpus, provider)
        assert len(dense_search(index, provider, "q", k=10)) == 2

    def test_matches_brute_force_order(self):
        corpus = corpus_of("aa", "bb", "cc", "dd")
        vectors = {"aa": [2.0, 1.0], "bb": [-1.0, 3.0], "cc": [0.5, 0.5], "dd": [3.0, -2.0], "q": [1.0, 2.0]}
        provider = FixedProvider(vectors, 2)
        index = build_dense_index(corpus, provider)
        got = [r.tweet_id for r in dense_search(index, provider, "q", k=4)]
        expected = dense_order_direct(
            ["d0", "d1", "d2", "d3"],
            [vectors[t] for t in ("aa", "bb", "cc", "dd")],
            vectors["q"],
        )
        assert got == expected

    def test_dimension_mismatch_rejected(self):
        corpus = corpus_of("aa")
        index = build_dense_index(corpus, FixedProvider({"aa": [1.0, 0.0]}, 2))
        bad = FixedProvider({"q": [1.0, 0.0, 0.0]}, 3)
        with pytest.raises(ValueError, match="dimension"):
            dense_search(index, bad, "q", k=1)

    def test_hashing_provider_deterministic(self):
        provider = HashingEmbeddingProvider(dim=16)
        a = provider.embed(["covid spreads fast", "other text"])
        b = provider.embed(["covid spreads fast", "other text"])
        assert np.array_equal(a, b)
        assert a.shape == (2, 16)
