"""Contradictory stance mining: top-e supporting and refuting tweets per claim."""

from __future__ import annotations

from dataclasses import dataclass, field

from contraqa.corpus import Corpus, Dataset, Question
from contraqa.retrieval import Retriever
from contraqa.stance import Claim, StanceLabel, StanceScorer


@dataclass(frozen=True)
class StanceEvidence:
    tweet_id: str
    label: StanceLabel
    stance_score: float
    retrieval_score: float


@dataclass
class MiningResult:
    supporting: list[StanceEvidence] = field(default_factory=list)
    refuting: list[StanceEvidence] = field(default_factory=list)


def mine_contradictory(
    claim: Claim,
    retriever: Retriever,
    scorer: StanceScorer,
    corpus: Corpus,
    k: int,
    e: int,
    retrieval_blend: float = 0.0,
) -> MiningResult:
    """Retrieve top-k tweets for the claim, classify, keep top-e per stance.

    Neutral tweets are discarded. Within each stance, evidence is ranked by
    that label's score descending (ties by ascending tweet id);
    ``retrieval_blend`` optionally mixes the retrieval score into the ranking
    key (default 0 ranks by stance score alone).
    """
    if k < 1 or e < 1:
        raise ValueError("k and e must be >= 1")
    hits = retriever(claim.text, k)
    if not hits:
        return MiningResult()
    tweets = [corpus.get(hit.tweet_id) for hit in hits]
    judgments = scorer.classify_batch(claim, tweets)
    buckets: dict[StanceLabel, list[StanceEvidence]] = {
        StanceLabel.SUPPORTING: [],
        StanceLabel.REFUTING: [],
    }
    for hit, judgment in zip(hits, judgments):
        if judgment.label is StanceLabel.NEUTRAL:
            continue
        buckets[judgment.label].append(
            StanceEvidence(
                tweet_id=hit.tweet_id,
                label=judgment.label,
                stance_score=judgment.scores.get(judgment.label, 0.0),
                retrieval_score=hit.score,
            )
        )

    def rank(evidence: list[StanceEvidence]) -> list[StanceEvidence]:
        keyed = sorted(
            evidence,
            key=lambda ev: (
                -(ev.stance_score + retrieval_blend * ev.retrieval_score),
                ev.tweet_id,
            ),
        )
        return keyed[:e]

    return MiningResult(
        supporting=rank(buckets[StanceLabel.SUPPORTING]),
        refuting=rank(buckets[StanceLabel.REFUTING]),
    )


def restrict_to_annotated(question: Question, dataset: Dataset) -> set[str]:
    """Intrinsic-mode candidate pool: all tweet ids annotated for the question."""
    entry = dataset.get(question.id)
    pool: set[str] = set()
    for answer in entry.answers:
        pool |= answer.supporting | answer.refuting | answer.neutral
    return pool
