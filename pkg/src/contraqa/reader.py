"""Multi-answer prediction: per-tweet span extraction and weighted aggregation."""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

from contraqa.corpus import Corpus, Question, Tweet
from contraqa.retrieval import RankedTweet

_ARTICLES = {"a", "an", "the"}
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_WS_RE = re.compile(r"\s+")


def normalize_answer(text: str) -> str:
    """Answer normal form: lowercase, no punctuation, leading articles dropped."""
    text = _WS_RE.sub(" ", text.lower().translate(_PUNCT_TABLE)).strip()
    tokens = text.split(" ") if text else []
    while tokens and tokens[0] in _ARTICLES:
        tokens = tokens[1:]
    return " ".join(tokens)


@dataclass(frozen=True)
class AnswerSpan:
    text: str
    span_score: float


class AnswerExtractor(Protocol):
    is_generative: bool

    def extract_one(self, question: Question, tweet: Tweet) -> AnswerSpan | None: ...


class MockExtractor:
    """Fixture-driven extractor returning pre-registered spans.

    Fixture rows: {"question_id", "tweet_id", "answer", "score"}; unregistered
    (question, tweet) pairs yield no span.
    """

    is_generative = False

    def __init__(self, spans: dict[tuple[str, str], AnswerSpan] | None = None):
        self.spans = dict(spans or {})

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "MockExtractor":
        spans: dict[tuple[str, str], AnswerSpan] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                spans[(row["question_id"], row["tweet_id"])] = AnswerSpan(
                    text=row["answer"], span_score=float(row.get("score", 1.0))
                )
        return cls(spans)

    def register(self, question_id: str, tweet_id: str, answer: str, score: float = 1.0) -> None:
        self.spans[(question_id, tweet_id)] = AnswerSpan(text=answer, span_score=score)

    def extract_one(self, question: Question, tweet: Tweet) -> AnswerSpan | None:
        return self.spans.get((question.id, tweet.id))


@dataclass
class AnswerCandidate:
    answer_norm: str
    display_text: str
    combined_score: float
    source_tweet_ids: list[str]


@dataclass
class ReaderConfig:
    m: int = 5  # number of answers to predict
    retrieval_weight: float = 0.5  # weight on the retrieval score vs the span score
    max_answer_tokens: int = 5

    def __post_init__(self) -> None:
        if not 0.0 <= self.retrieval_weight <= 1.0:
            raise ValueError("retrieval_weight must be in [0, 1]")
        if self.m < 1:
            raise ValueError("m must be >= 1")


@dataclass
class ExtractionDiagnostics:
    extracted: int = 0
    no_span: int = 0
    too_long: int = 0
    failures: list[str] = field(default_factory=list)


def _min_max(values: list[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [1.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def aggregate_answers(
    question: Question,
    ranked: Sequence[RankedTweet],
    extractor: AnswerExtractor,
    cfg: ReaderConfig,
    corpus: Corpus,
) -> tuple[list[AnswerCandidate], ExtractionDiagnostics]:
    """Extract one span per retrieved tweet, then merge into top-m candidates.

    Retrieval and span scores are min-max normalized over the surviving
    batch before mixing; for generative extractors only the retrieval score
    is used. Candidates sharing a normal form are merged keeping the max
    combined score, then sorted (score desc, normal form asc) and truncated.
    """
    if not ranked:
        raise ValueError("ranked tweet list must be non-empty")
    diag = ExtractionDiagnostics()
    rows: list[tuple[RankedTweet, AnswerSpan]] = []
    for hit in ranked:
        tweet = corpus.get(hit.tweet_id)
        try:
            span = extractor.extract_one(question, tweet)
        except Exception as exc:  # extractor failure is not fatal
            diag.failures.append(f"{hit.tweet_id}: {exc}")
            continue
        if span is None:
            diag.no_span += 1
            continue
        if len(span.text.split()) > cfg.max_answer_tokens:
            diag.too_long += 1
            continue
        diag.extracted += 1
        rows.append((hit, span))

    if not rows:
        return [], diag

    retrieval_norm = _min_max([hit.score for hit, _ in rows])
    span_norm = _min_max([span.span_score for _, span in rows])
    merged: dict[str, AnswerCandidate] = {}
    for (hit, span), r_norm, s_norm in zip(rows, retrieval_norm, span_norm):
        if extractor.is_generative:
            combined = r_norm
        else:
            combined = cfg.retrieval_weight * r_norm + (1.0 - cfg.retrieval_weight) * s_norm
        key = normalize_answer(span.text)
        candidate = merged.get(key)
        if candidate is None:
            merged[key] = AnswerCandidate(
                answer_norm=key,
                display_text=span.text,
                combined_score=combined,
                source_tweet_ids=[hit.tweet_id],
            )
        else:
            if combined > candidate.combined_score:
                candidate.combined_score = combined
                candidate.display_text = span.text
            candidate.source_tweet_ids.append(hit.tweet_id)

    ordered = sorted(merged.values(), key=lambda c: (-c.combined_score, c.answer_norm))
    return ordered[: cfg.m], diag
