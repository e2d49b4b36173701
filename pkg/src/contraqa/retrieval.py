"""Sparse (BM25) and dense top-k tweet retrieval."""

from __future__ import annotations

import gzip
import json
import math
import re
import zlib
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

import numpy as np

from contraqa.corpus import Corpus, normalize_text
from contraqa.errors import IndexFormatError

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

DEFAULT_K1 = 0.9
DEFAULT_B = 0.4

INDEX_FORMAT = "contraqa-index"
INDEX_VERSION = 1


def tokenize(text: str) -> list[str]:
    """Normalize, then split on whitespace and punctuation boundaries.

    Punctuation-only tokens are dropped; duplicates are preserved; no
    stemming or stopword removal (tweets are short, hashtag-derived terms
    matter).
    """
    return _TOKEN_RE.findall(normalize_text(text))


@dataclass(frozen=True)
class RankedTweet:
    tweet_id: str
    score: float


# A retriever handle: (query, k) -> ranked tweets, descending score.
Retriever = Callable[[str, int], list[RankedTweet]]


class InvertedIndex:
    """Bag-of-words index with per-term postings and BM25 length statistics."""

    def __init__(
        self,
        doc_ids: list[str],
        doc_lengths: list[int],
        postings: dict[str, list[tuple[int, int]]],
        k1: float = DEFAULT_K1,
        b: float = DEFAULT_B,
    ):
        self.doc_ids = doc_ids
        self.doc_lengths = doc_lengths
        self.postings = postings
        self.k1 = k1
        self.b = b
        self.doc_count = len(doc_ids)
        self.avg_doc_length = sum(doc_lengths) / len(doc_lengths) if doc_lengths else 0.0

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, InvertedIndex)
            and self.doc_ids == other.doc_ids
            and self.doc_lengths == other.doc_lengths
            and self.postings == other.postings
            and self.k1 == other.k1
            and self.b == other.b
        )


def build_index(corpus: Corpus, k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> InvertedIndex:
    if len(corpus) == 0:
        raise ValueError("cannot build an index over an empty corpus")
    doc_ids: list[str] = []
    doc_lengths: list[int] = []
    postings: dict[str, list[tuple[int, int]]] = {}
    for pos, tweet in enumerate(corpus):
        terms = tokenize(tweet.text)
        doc_ids.append(tweet.id)
        doc_lengths.append(len(terms))
        for term, tf in Counter(terms).items():
            postings.setdefault(term, []).append((pos, tf))
    # Postings come out position-sorted because documents are scanned in order.
    return InvertedIndex(doc_ids, doc_lengths, postings, k1=k1, b=b)


def bm25_idf(doc_count: int, df: int) -> float:
    # ln(1 + (N - df + 0.5) / (df + 0.5)); stays positive for high-df terms.
    return math.log(1.0 + (doc_count - df + 0.5) / (df + 0.5))


def bm25_search(index: InvertedIndex, query: str, k: int) -> list[RankedTweet]:
    """Okapi BM25 top-k. Only positive-scoring docs are returned.

    Each query token occurrence contributes (duplicated terms score twice).
    Ties are broken by ascending tweet id for cross-platform determinism.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    terms = tokenize(query)
    if not terms:
        return []
    scores: dict[int, float] = {}
    for term in terms:
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = bm25_idf(index.doc_count, len(plist))
        for pos, tf in plist:
            norm = index.k1 * (1.0 - index.b + index.b * index.doc_lengths[pos] / index.avg_doc_length)
            scores[pos] = scores.get(pos, 0.0) + idf * tf * (index.k1 + 1.0) / (tf + norm)
    ranked = sorted(
        ((index.doc_ids[pos], score) for pos, score in scores.items() if score > 0.0),
        key=lambda item: (-item[1], item[0]),
    )
    return [RankedTweet(tweet_id=tid, score=score) for tid, score in ranked[:k]]


def save_index(index: InvertedIndex, path: str | Path) -> None:
    """Persist to a gzipped JSON artifact with an embedded format-version tag."""
    payload = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "k1": index.k1,
        "b": index.b,
        "doc_ids": index.doc_ids,
        "doc_lengths": index.doc_lengths,
        "postings": {term: [[pos, tf] for pos, tf in plist] for term, plist in index.postings.items()},
    }
    with gzip.open(path, "wt", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_index(path: str | Path) -> InvertedIndex:
    try:
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IndexFormatError(f"cannot read index artifact {path}: {exc}") from exc
    if payload.get("format") != INDEX_FORMAT or payload.get("version") != INDEX_VERSION:
        raise IndexFormatError(
            f"unsupported index artifact (format={payload.get('format')!r}, "
            f"version={payload.get('version')!r})"
        )
    postings = {
        term: [(int(pos), int(tf)) for pos, tf in plist]
        for term, plist in payload["postings"].items()
    }
    return InvertedIndex(
        doc_ids=payload["doc_ids"],
        doc_lengths=[int(n) for n in payload["doc_lengths"]],
        postings=postings,
        k1=payload["k1"],
        b=payload["b"],
    )


class EmbeddingProvider(Protocol):
    """Maps texts to fixed-dimension vectors; deterministic per provider."""

    dim: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


class HashingEmbeddingProvider:
    """Model-free deterministic embeddings via signed token feature hashing.

    A cheap stand-in for a transformer encoder: texts sharing tokens get
    correlated vectors. Stable across runs and platforms (crc32, not hash()).
    """

    def __init__(self, dim: int = 64):
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for term in tokenize(text):
                h = zlib.crc32(term.encode("utf-8"))
                sign = 1.0 if (h >> 16) & 1 else -1.0
                out[row, h % self.dim] += sign
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out


class DenseIndex:
    """Row-per-document embedding matrix aligned with the corpus order."""

    def __init__(self, doc_ids: list[str], vectors: np.ndarray):
        if vectors.ndim != 2 or vectors.shape[0] != len(doc_ids):
            raise ValueError("vectors must be a (doc_count, dim) matrix")
        self.doc_ids = doc_ids
        self.vectors = vectors

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def build_dense_index(corpus: Corpus, provider: EmbeddingProvider, batch_size: int = 256) -> DenseIndex:
    texts = [tweet.text for tweet in corpus]
    chunks = [
        np.asarray(provider.embed(texts[i : i + batch_size]), dtype=np.float64)
        for i in range(0, len(texts), batch_size)
    ]
    vectors = np.vstack(chunks) if chunks else np.zeros((0, provider.dim))
    return DenseIndex([tweet.id for tweet in corpus], vectors)


def dense_search(
    index: DenseIndex, provider: EmbeddingProvider, query: str, k: int
) -> list[RankedTweet]:
    """Exact (full-scan) top-k by inner product; no positivity filter."""
    if k < 1:
        raise ValueError("k must be >= 1")
    qvec = np.asarray(provider.embed([query]), dtype=np.float64)[0]
    if qvec.shape[0] != index.dim:
        raise ValueError(f"query dimension {qvec.shape[0]} != index dimension {index.dim}")
    scores = index.vectors @ qvec
    order = sorted(range(len(index.doc_ids)), key=lambda i: (-scores[i], index.doc_ids[i]))
    return [RankedTweet(tweet_id=index.doc_ids[i], score=float(scores[i])) for i in order[:k]]


def save_dense_index(index: DenseIndex, path: str | Path) -> None:
    np.savez_compressed(path, doc_ids=np.array(index.doc_ids, dtype=object), vectors=index.vectors)


def load_dense_index(path: str | Path) -> DenseIndex:
    try:
        data = np.load(path, allow_pickle=True)
        return DenseIndex([str(t) for t in data["doc_ids"]], np.asarray(data["vectors"], dtype=np.float64))
    except (OSError, KeyError, ValueError) as exc:
        raise IndexFormatError(f"cannot read dense index artifact {path}: {exc}") from exc


def corpus_retriever(index: InvertedIndex) -> Retriever:
    return lambda query, k: bm25_search(index, query, k)


def dense_retriever(index: DenseIndex, provider: EmbeddingProvider) -> Retriever:
    return lambda query, k: dense_search(index, provider, query, k)


def restricted_retriever(corpus: Corpus, pool_ids: set[str], k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> Retriever:
    """BM25 retriever over a tweet-id subset (the intrinsic candidate pool).

    Builds a sub-index over just the pool so retrieval scores exist for
    answer aggregation; length statistics come from the pool itself.
    """
    pool_tweets = [tweet for tweet in corpus if tweet.id in pool_ids]
    if not pool_tweets:
        return lambda query, k: []
    sub = Corpus(pool_tweets)
    sub_index = build_index(sub, k1=k1, b=b)
    return corpus_retriever(sub_index)
