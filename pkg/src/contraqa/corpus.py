"""Tweet corpus and question dataset loading, cleaning, and validation."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator

from contraqa.errors import CorpusFormatError, DatasetValidationError

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_WS_RE = re.compile(r"\s+")
_CRLF_RE = re.compile(r"[\r\n]")


def normalize_text(text: str) -> str:
    """Canonical form used for dedup and tokenization.

    Lowercases, removes URLs and @-mentions, strips '#' from hashtags (the
    token itself is kept), and collapses all whitespace to single spaces.
    """
    text = text.lower()
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = text.replace("#", "")
    return _WS_RE.sub(" ", text).strip()


def is_retweet(text: str) -> bool:
    # Prefix test on the lowercased raw text; normalize_text would strip the
    # '@' that marks a retweet.
    return _WS_RE.sub(" ", text.lower()).lstrip().startswith("rt @")


@dataclass(frozen=True)
class Tweet:
    id: str
    text: str


@dataclass
class IngestCounts:
    lines: int = 0
    kept: int = 0
    retweets_dropped: int = 0
    duplicates_dropped: int = 0
    empty_dropped: int = 0


class Corpus:
    """Immutable, deduplicated tweet collection with id lookup."""

    def __init__(self, tweets: list[Tweet], ingest_counts: IngestCounts | None = None):
        self.tweets = tweets
        self.ingest_counts = ingest_counts
        self._positions: dict[str, int] = {}
        for pos, tweet in enumerate(tweets):
            if tweet.id in self._positions:
                raise CorpusFormatError(f"duplicate tweet id: {tweet.id}")
            self._positions[tweet.id] = pos

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self) -> Iterator[Tweet]:
        return iter(self.tweets)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Corpus) and self.tweets == other.tweets

    def __contains__(self, tweet_id: str) -> bool:
        return tweet_id in self._positions

    def position(self, tweet_id: str) -> int:
        return self._positions[tweet_id]

    def get(self, tweet_id: str) -> Tweet:
        return self.tweets[self._positions[tweet_id]]


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSONL tweet file, dropping retweets and normalized-text duplicates.

    Each line must be a JSON object with string fields "id" and "text";
    unknown keys are ignored. The first occurrence of a duplicate group (in
    file order) survives. Raises :class:`CorpusFormatError` naming the line
    number on malformed input and the id on duplicates.
    """
    counts = IngestCounts()
    tweets: list[Tweet] = []
    seen_ids: set[str] = set()
    seen_norm: set[str] = set()

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            counts.lines += 1
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"line {lineno}: expected a JSON object")
            tweet_id = record.get("id")
            text = record.get("text")
            if not isinstance(tweet_id, str) or not tweet_id:
                raise CorpusFormatError(f"line {lineno}: 'id' must be a non-empty string")
            if not isinstance(text, str):
                raise CorpusFormatError(f"line {lineno}: 'text' must be a string")
            if tweet_id in seen_ids:
                raise CorpusFormatError(f"duplicate tweet id: {tweet_id} (line {lineno})")
            seen_ids.add(tweet_id)

            text = _CRLF_RE.sub(" ", text).strip()
            if not text:
                counts.empty_dropped += 1
                continue
            if is_retweet(text):
                counts.retweets_dropped += 1
                continue
            norm = normalize_text(text)
            if norm in seen_norm:
                counts.duplicates_dropped += 1
                continue
            seen_norm.add(norm)
            tweets.append(Tweet(id=tweet_id, text=text))
            counts.kept += 1

    return Corpus(tweets, ingest_counts=counts)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tweet in corpus:
            fh.write(json.dumps({"id": tweet.id, "text": tweet.text}, ensure_ascii=False))
            fh.write("\n")


class QType(str, Enum):
    ENTITY = "entity"
    YESNO = "yesno"


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    qtype: QType
    topic: str = ""


@dataclass(frozen=True)
class GoldAnswer:
    """A distinct gold answer with its annotated stance evidence tweet ids."""

    text: str
    supporting: frozenset[str] = field(default_factory=frozenset)
    refuting: frozenset[str] = field(default_factory=frozenset)
    neutral: frozenset[str] = field(default_factory=frozenset)


@dataclass(frozen=True)
class AnnotatedQuestion:
    question: Question
    answers: tuple[GoldAnswer, ...]


class Dataset:
    """Validated question set; every question carries >= 2 gold answers."""

    def __init__(self, entries: list[AnnotatedQuestion]):
        self.entries = entries
        self._by_id = {entry.question.id: entry for entry in entries}
        if len(self._by_id) != len(entries):
            raise DatasetValidationError("duplicate question ids in dataset")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[AnnotatedQuestion]:
        return iter(self.entries)

    def __contains__(self, question_id: str) -> bool:
        return question_id in self._by_id

    def get(self, question_id: str) -> AnnotatedQuestion:
        if question_id not in self._by_id:
            raise DatasetValidationError(f"unknown question id: {question_id}")
        return self._by_id[question_id]


def _parse_evidence(raw: object, qid: str, answer: str, kind: str) -> frozenset[str]:
    if raw is None:
        return frozenset()
    if not isinstance(raw, list) or not all(isinstance(t, str) for t in raw):
        raise DatasetValidationError(
            f"question {qid}: answer '{answer}': '{kind}' must be a list of tweet-id strings"
        )
    return frozenset(raw)


def load_dataset(path: str | Path, corpus: Corpus) -> Dataset:
    """Load and validate a dataset JSON file against a loaded corpus.

    The file is a top-level list of question objects, each with "id", "text",
    "qtype" ("entity" | "yesno"), "topic", and "answers" (each answer holding
    "text" plus "supporting"/"refuting"/"neutral" tweet-id lists). Every
    referenced tweet id must exist in the corpus, every question needs at
    least two answers, and yes/no questions must have exactly YES and NO.
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise DatasetValidationError("dataset file must be a top-level JSON list")

    entries: list[AnnotatedQuestion] = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise DatasetValidationError(f"record {i}: expected a JSON object")
        qid = item.get("id")
        text = item.get("text")
        qtype_raw = item.get("qtype")
        if not isinstance(qid, str) or not qid:
            raise DatasetValidationError(f"record {i}: 'id' must be a non-empty string")
        if not isinstance(text, str) or not text.strip():
            raise DatasetValidationError(f"question {qid}: 'text' must be a non-empty string")
        try:
            qtype = QType(qtype_raw)
        except ValueError:
            raise DatasetValidationError(
                f"question {qid}: 'qtype' must be 'entity' or 'yesno', got {qtype_raw!r}"
            ) from None

        raw_answers = item.get("answers")
        if not isinstance(raw_answers, list) or len(raw_answers) < 2:
            raise DatasetValidationError(f"question {qid}: needs at least 2 answers")

        answers: list[GoldAnswer] = []
        for raw_answer in raw_answers:
            if not isinstance(raw_answer, dict) or not isinstance(raw_answer.get("text"), str):
                raise DatasetValidationError(f"question {qid}: malformed answer object")
            answer_text = raw_answer["text"]
            supporting = _parse_evidence(raw_answer.get("supporting"), qid, answer_text, "supporting")
            refuting = _parse_evidence(raw_answer.get("refuting"), qid, answer_text, "refuting")
            neutral = _parse_evidence(raw_answer.get("neutral"), qid, answer_text, "neutral")
            overlap = supporting & refuting
            if overlap:
                raise DatasetValidationError(
                    f"question {qid}: answer '{answer_text}': tweet(s) "
                    f"{sorted(overlap)} are both supporting and refuting"
                )
            for tweet_id in sorted(supporting | refuting | neutral):
                if tweet_id not in corpus:
                    raise DatasetValidationError(
                        f"question {qid}: evidence tweet id {tweet_id} not in corpus"
                    )
            answers.append(
                GoldAnswer(text=answer_text, supporting=supporting, refuting=refuting, neutral=neutral)
            )

        if qtype is QType.YESNO:
            labels = sorted(a.text.strip().lower() for a in answers)
            if labels != ["no", "yes"]:
                raise DatasetValidationError(
                    f"question {qid}: yes/no questions must have exactly the answers YES and NO"
                )

        entries.append(
            AnnotatedQuestion(
                question=Question(id=qid, text=text, qtype=qtype, topic=item.get("topic", "") or ""),
                answers=tuple(answers),
            )
        )

    return Dataset(entries)


@dataclass
class CorpusStats:
    questions_by_type: dict[str, int]
    avg_answers_by_type: dict[str, float]
    evidence_counts: dict[str, int]
    evidence_percentages: dict[str, float]


def corpus_stats(dataset: Dataset) -> CorpusStats:
    """Question, answer, and stance-evidence counts for a dataset."""
    q_counts = {"entity": 0, "yesno": 0}
    answer_counts = {"entity": 0, "yesno": 0}
    evidence = {"supporting": 0, "refuting": 0, "neutral": 0}
    for entry in dataset:
        qtype = entry.question.qtype.value
        q_counts[qtype] += 1
        answer_counts[qtype] += len(entry.answers)
        for answer in entry.answers:
            evidence["supporting"] += len(answer.supporting)
            evidence["refuting"] += len(answer.refuting)
            evidence["neutral"] += len(answer.neutral)

    total_q = sum(q_counts.values())
    avg = {
        qtype: (answer_counts[qtype] / q_counts[qtype]) if q_counts[qtype] else 0.0
        for qtype in q_counts
    }
    avg["overall"] = (sum(answer_counts.values()) / total_q) if total_q else 0.0
    total_evidence = sum(evidence.values())
    percentages = {
        label: (100.0 * count / total_evidence) if total_evidence else 0.0
        for label, count in evidence.items()
    }
    return CorpusStats(
        questions_by_type=q_counts,
        avg_answers_by_type=avg,
        evidence_counts=evidence,
        evidence_percentages=percentages,
    )
