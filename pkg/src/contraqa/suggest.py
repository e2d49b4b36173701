"""Annotation candidate suggestion: query expansion, embedding rerank, clustering.

Fans a claim template out over topic-entity aliases, retrieves and cleans a
tweet pool, reranks it by embedding similarity to the claim, clusters the top
pool, and returns the best tweets of each cluster so annotators see diverse,
potentially controversial candidates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from contraqa.corpus import Corpus, Tweet, is_retweet, normalize_text
from contraqa.retrieval import EmbeddingProvider, Retriever

PLACEHOLDER = "TOPIC_ENTITY"


@dataclass(frozen=True)
class QueryTemplate:
    pattern: str

    def __post_init__(self) -> None:
        if self.pattern.count(PLACEHOLDER) != 1:
            raise ValueError(f"template must contain {PLACEHOLDER} exactly once")

    def fill(self, alias: str) -> str:
        return self.pattern.replace(PLACEHOLDER, alias)


@dataclass
class SuggestConfig:
    pool_size: int = 1000
    clusters: int = 5
    per_cluster: int = 20
    kmeans_iters: int = 50
    seed: int = 0


@dataclass
class Suggestion:
    tweet: Tweet
    cluster: int  # -1 when the pool was too small to cluster or no provider is set
    similarity: float

    def to_json(self) -> dict:
        return {
            "id": self.tweet.id,
            "text": self.tweet.text,
            "cluster": self.cluster,
            "similarity": self.similarity,
        }


def expand_queries(template: QueryTemplate | str, aliases: list[str]) -> list[str]:
    """One query per alias, placeholder substituted, order preserved."""
    if isinstance(template, str):
        template = QueryTemplate(template)
    if not aliases:
        raise ValueError("need at least one topic-entity alias")
    return [template.fill(alias) for alias in aliases]


def kmeans(vectors: np.ndarray, k: int, iters: int = 50, seed: int = 0) -> list[int]:
    """Lloyd's algorithm with seeded k-means++ init and Euclidean distance.

    Stops when assignments are stable or after ``iters`` rounds. An empty
    cluster is repaired by stealing the point currently farthest from its
    own centroid.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n = vectors.shape[0]
    if n < k:
        raise ValueError(f"need at least k={k} vectors, got {n}")
    rng = np.random.default_rng(seed)

    # k-means++ seeding: D^2-weighted sampling.
    centroids = np.empty((k, vectors.shape[1]), dtype=np.float64)
    centroids[0] = vectors[rng.integers(n)]
    for i in range(1, k):
        dist_sq = np.min(
            ((vectors[:, None, :] - centroids[None, :i, :]) ** 2).sum(axis=2), axis=1
        )
        total = dist_sq.sum()
        if total <= 0.0:
            centroids[i] = vectors[rng.integers(n)]
        else:
            centroids[i] = vectors[rng.choice(n, p=dist_sq / total)]

    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(max(iters, 1)):
        distances = ((vectors[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(distances, axis=1)
        assigned = distances[np.arange(n), new_labels].copy()
        for cluster in range(k):
            if np.any(new_labels == cluster):
                continue
            thief = int(np.argmax(assigned))
            new_labels[thief] = cluster
            centroids[cluster] = vectors[thief]
            assigned[thief] = -np.inf  # a point can be stolen once per round
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for cluster in range(k):
            centroids[cluster] = vectors[labels == cluster].mean(axis=0)
    return [int(c) for c in labels]


def _clean_pool(pool: list[tuple[Tweet, float]]) -> list[tuple[Tweet, float]]:
    # Corpus tweets are already deduplicated at ingest; re-apply the cleaning
    # rules anyway so pools built from arbitrary retriever handles stay clean.
    seen: set[str] = set()
    cleaned = []
    for tweet, score in pool:
        if is_retweet(tweet.text):
            continue
        norm = normalize_text(tweet.text)
        if norm in seen:
            continue
        seen.add(norm)
        cleaned.append((tweet, score))
    return cleaned


def suggest_candidates(
    template: QueryTemplate | str,
    aliases: list[str],
    corpus: Corpus,
    retriever: Retriever,
    cfg: SuggestConfig | None = None,
    provider: EmbeddingProvider | None = None,
) -> list[Suggestion]:
    """Top controversial-tweet candidates for annotators.

    Without an embedding provider the pool is ranked by retrieval score
    against the claim text and returned unclustered (degraded, model-free).
    """
    cfg = cfg or SuggestConfig()
    if isinstance(template, str):
        template = QueryTemplate(template)
    queries = expand_queries(template, aliases)

    pool: list[tuple[Tweet, float]] = []
    seen_ids: set[str] = set()
    for query in queries:
        for hit in retriever(query, cfg.pool_size):
            if hit.tweet_id in seen_ids:
                continue
            seen_ids.add(hit.tweet_id)
            pool.append((corpus.get(hit.tweet_id), hit.score))
    pool = _clean_pool(pool)
    if not pool:
        return []

    claim_text = template.fill(aliases[0])
    target = cfg.clusters * cfg.per_cluster

    if provider is None:
        claim_scores = {
            hit.tweet_id: hit.score for hit in retriever(claim_text, max(cfg.pool_size, len(pool)))
        }
        ranked = sorted(
            ((tweet, claim_scores.get(tweet.id, 0.0)) for tweet, _ in pool),
            key=lambda item: (-item[1], item[0].id),
        )[: cfg.pool_size]
        return [Suggestion(tweet=t, cluster=-1, similarity=s) for t, s in ranked[:target]]

    texts = [tweet.text for tweet, _ in pool]
    vectors = np.asarray(provider.embed(texts), dtype=np.float64)
    claim_vec = np.asarray(provider.embed([claim_text]), dtype=np.float64)[0]
    similarities = vectors @ claim_vec

    order = sorted(range(len(pool)), key=lambda i: (-similarities[i], pool[i][0].id))
    order = order[: cfg.pool_size]

    if len(order) < cfg.clusters:
        return [
            Suggestion(tweet=pool[i][0], cluster=-1, similarity=float(similarities[i]))
            for i in order
        ]

    kept_vectors = vectors[order]
    labels = kmeans(kept_vectors, cfg.clusters, iters=cfg.kmeans_iters, seed=cfg.seed)

    members: dict[int, list[int]] = {}
    for rank, cluster in enumerate(labels):
        members.setdefault(cluster, []).append(rank)

    # Clusters are emitted in order of their best member's global rank.
    cluster_order = sorted(members, key=lambda c: members[c][0])
    selected: list[int] = []
    chosen: set[int] = set()
    for cluster in cluster_order:
        for rank in members[cluster][: cfg.per_cluster]:
            selected.append(rank)
            chosen.add(rank)
    # Uneven clusters can leave slots open; fill from the global ranking so
    # the suggestion count stays min(pool, clusters * per_cluster).
    if len(selected) < min(len(order), cfg.clusters * cfg.per_cluster):
        for rank in range(len(order)):
            if len(selected) >= cfg.clusters * cfg.per_cluster:
                break
            if rank not in chosen:
                selected.append(rank)
                chosen.add(rank)

    out = []
    for rank in selected[: cfg.clusters * cfg.per_cluster]:
        i = order[rank]
        out.append(
            Suggestion(tweet=pool[i][0], cluster=labels[rank], similarity=float(similarities[i]))
        )
    return out
