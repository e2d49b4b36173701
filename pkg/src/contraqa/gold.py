"""Gold-annotation-backed oracle components (intrinsic upper-bound runs)."""

from __future__ import annotations

from typing import Sequence

from contraqa.corpus import Dataset, Tweet
from contraqa.reader import MockExtractor, normalize_answer
from contraqa.stance import Claim, StanceJudgment, StanceLabel


class GoldOracleScorer:
    """Labels annotated (claim, tweet) pairs with their gold stance.

    Tweets not annotated for the claim's answer are Neutral. The chosen
    label scores 1.0, the others 0.0.
    """

    def __init__(self, dataset: Dataset):
        self._lookup: dict[tuple[str, str], tuple[frozenset[str], frozenset[str]]] = {}
        for entry in dataset:
            for answer in entry.answers:
                key = (entry.question.id, normalize_answer(answer.text))
                self._lookup[key] = (answer.supporting, answer.refuting)

    def classify_batch(self, claim: Claim, tweets: Sequence[Tweet]) -> list[StanceJudgment]:
        supporting, refuting = self._lookup.get(
            (claim.question_id, normalize_answer(claim.answer_text)), (frozenset(), frozenset())
        )
        judgments = []
        for tweet in tweets:
            if tweet.id in supporting:
                label = StanceLabel.SUPPORTING
            elif tweet.id in refuting:
                label = StanceLabel.REFUTING
            else:
                label = StanceLabel.NEUTRAL
            scores = {lab: 0.0 for lab in StanceLabel}
            scores[label] = 1.0
            judgments.append(StanceJudgment(label=label, scores=scores))
        return judgments


def gold_extractor(dataset: Dataset) -> MockExtractor:
    """Extractor that returns the gold answer for every annotated evidence tweet."""
    extractor = MockExtractor()
    for entry in dataset:
        for answer in entry.answers:
            for tweet_id in sorted(answer.supporting | answer.refuting):
                extractor.register(entry.question.id, tweet_id, answer.text)
    return extractor
