"""Claim textualization and 3-way stance classification."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Protocol, Sequence

from contraqa.corpus import Question, Tweet, normalize_text
from contraqa.retrieval import tokenize

ANSWER_CONNECTOR = " Answer is "
_SENTENCE_END = (".", "!", "?")


class StanceLabel(str, Enum):
    SUPPORTING = "supporting"
    REFUTING = "refuting"
    NEUTRAL = "neutral"


# Fixed tie order: argmax ties resolve Supporting > Refuting > Neutral.
_LABEL_ORDER = (StanceLabel.SUPPORTING, StanceLabel.REFUTING, StanceLabel.NEUTRAL)


class NliLabel(str, Enum):
    ENTAILMENT = "entailment"
    NEUTRAL = "neutral"
    CONTRADICTION = "contradiction"


def map_nli_label(nli: NliLabel | str) -> StanceLabel:
    """Entailment -> Supporting, Contradiction -> Refuting, Neutral -> Neutral."""
    mapping = {
        NliLabel.ENTAILMENT: StanceLabel.SUPPORTING,
        NliLabel.CONTRADICTION: StanceLabel.REFUTING,
        NliLabel.NEUTRAL: StanceLabel.NEUTRAL,
    }
    return mapping[NliLabel(nli)]


@dataclass(frozen=True)
class Claim:
    """A textualized (question, answer) pair."""

    question_id: str
    answer_text: str
    text: str


def make_claim(question: Question, answer_text: str) -> Claim:
    """Concatenate question and answer with the fixed connector string.

    A trailing period is added unless the answer already ends with sentence
    punctuation. Yes/no questions pass answer_text="yes".
    """
    if not answer_text.strip():
        raise ValueError("answer text must be non-empty")
    if not question.text.strip():
        raise ValueError("question text must be non-empty")
    text = question.text.strip() + ANSWER_CONNECTOR + answer_text.strip()
    if not text.endswith(_SENTENCE_END):
        text += "."
    return Claim(question_id=question.id, answer_text=answer_text, text=text)


@dataclass(frozen=True)
class StanceJudgment:
    label: StanceLabel
    scores: dict[StanceLabel, float]

    @staticmethod
    def from_scores(scores: dict[StanceLabel, float]) -> "StanceJudgment":
        label = max(_LABEL_ORDER, key=lambda lab: scores.get(lab, 0.0))
        return StanceJudgment(label=label, scores=dict(scores))


class StanceScorer(Protocol):
    def classify_batch(self, claim: Claim, tweets: Sequence[Tweet]) -> list[StanceJudgment]: ...


# Refutation cues for the model-free baseline; substring-matched on the
# normalized tweet text.
REFUTE_CUES = (
    "fake",
    "false",
    "myth",
    "debunked",
    "hoax",
    "not true",
    "no evidence",
    "unlikely",
    "does not",
    "doesn't",
    "won't",
    "cannot",
)

JACCARD_THRESHOLD = 0.2


class LexicalBaselineScorer:
    """Deterministic token-overlap scorer, a model-free stand-in for NLI.

    Jaccard overlap below the threshold means the tweet is off-topic
    (Neutral); otherwise a refutation cue flips the label to Refuting.
    """

    def __init__(self, threshold: float = JACCARD_THRESHOLD, cues: Sequence[str] = REFUTE_CUES):
        self.threshold = threshold
        self.cues = tuple(cues)

    def classify_batch(self, claim: Claim, tweets: Sequence[Tweet]) -> list[StanceJudgment]:
        claim_terms = set(tokenize(claim.text))
        judgments = []
        for tweet in tweets:
            tweet_terms = set(tokenize(tweet.text))
            union = claim_terms | tweet_terms
            jaccard = len(claim_terms & tweet_terms) / len(union) if union else 0.0
            if jaccard < self.threshold:
                scores = {
                    StanceLabel.SUPPORTING: 0.0,
                    StanceLabel.REFUTING: 0.0,
                    StanceLabel.NEUTRAL: 1.0 - jaccard,
                }
            else:
                norm = normalize_text(tweet.text)
                label = (
                    StanceLabel.REFUTING
                    if any(cue in norm for cue in self.cues)
                    else StanceLabel.SUPPORTING
                )
                scores = {lab: 0.0 for lab in _LABEL_ORDER}
                scores[label] = jaccard
            judgments.append(StanceJudgment.from_scores(scores))
        return judgments
