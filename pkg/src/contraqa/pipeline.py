"""End-to-end question answering for entity and yes/no questions."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from contraqa.corpus import Corpus, Dataset, Question, QType
from contraqa.mining import MiningResult, StanceEvidence, mine_contradictory, restrict_to_annotated
from contraqa.reader import AnswerExtractor, ReaderConfig, aggregate_answers
from contraqa.retrieval import (
    DenseIndex,
    EmbeddingProvider,
    InvertedIndex,
    Retriever,
    corpus_retriever,
    dense_retriever,
    restricted_retriever,
)
from contraqa.stance import Claim, StanceScorer, make_claim


class Mode(str, Enum):
    INTRINSIC = "intrinsic"  # candidates restricted to the question's annotated tweets
    EXTRINSIC = "extrinsic"  # candidates retrieved from the whole corpus


class Verdict(str, Enum):
    YES = "YES"
    NO = "NO"
    NOT_SURE = "NOT_SURE"


@dataclass
class PipelineConfig:
    k: int = 100
    m: int = 5
    e: int = 10
    retrieval_weight: float = 0.5
    mode: Mode = Mode.EXTRINSIC
    retriever: str = "bm25"  # "bm25" | "dense"
    # When true, evidence mining for entity answers reuses the question's
    # top-k retrieval instead of re-retrieving with the claim as the query.
    evidence_from_question_retrieval: bool = False
    stance_blend: float = 0.0

    def __post_init__(self) -> None:
        if self.m < 1 or self.k < self.m:
            raise ValueError("need k >= m >= 1")
        if self.e < 1:
            raise ValueError("need e >= 1")
        self.mode = Mode(self.mode)

    def reader_config(self) -> ReaderConfig:
        return ReaderConfig(m=self.m, retrieval_weight=self.retrieval_weight)


@dataclass
class EntityPrediction:
    answer: str
    supporting: list[StanceEvidence] = field(default_factory=list)
    refuting: list[StanceEvidence] = field(default_factory=list)


@dataclass
class YesNoPrediction:
    verdicts: set[Verdict]
    yes_evidence: list[StanceEvidence] = field(default_factory=list)
    no_evidence: list[StanceEvidence] = field(default_factory=list)


class QAEngine:
    """Wires retrieval, reading, stance scoring, and mining over one corpus."""

    def __init__(
        self,
        corpus: Corpus,
        index: InvertedIndex,
        scorer: StanceScorer,
        extractor: AnswerExtractor | None = None,
        dataset: Dataset | None = None,
        dense_index: DenseIndex | None = None,
        dense_provider: EmbeddingProvider | None = None,
    ):
        self.corpus = corpus
        self.index = index
        self.scorer = scorer
        self.extractor = extractor
        self.dataset = dataset
        self.dense_index = dense_index
        self.dense_provider = dense_provider

    def retriever_for(self, cfg: PipelineConfig, question: Question) -> Retriever:
        if cfg.mode is Mode.INTRINSIC:
            if self.dataset is None:
                raise ValueError("intrinsic mode requires a loaded dataset")
            pool = restrict_to_annotated(question, self.dataset)
            return restricted_retriever(self.corpus, pool, k1=self.index.k1, b=self.index.b)
        if cfg.retriever == "dense":
            if self.dense_index is None or self.dense_provider is None:
                raise ValueError("dense retrieval requires a dense index and an embedding provider")
            return dense_retriever(self.dense_index, self.dense_provider)
        return corpus_retriever(self.index)

    def _mine(self, claim: Claim, retriever: Retriever, cfg: PipelineConfig) -> MiningResult:
        return mine_contradictory(
            claim,
            retriever,
            self.scorer,
            self.corpus,
            k=cfg.k,
            e=cfg.e,
            retrieval_blend=cfg.stance_blend,
        )

    def answer_entity_question(self, question: Question, cfg: PipelineConfig) -> list[EntityPrediction]:
        """Top-m distinct answers, each with its mined contradictory evidence."""
        if question.qtype is not QType.ENTITY:
            raise ValueError(f"question {question.id} is not an entity question")
        if self.extractor is None:
            raise ValueError("entity questions require an answer extractor")
        retriever = self.retriever_for(cfg, question)
        ranked = retriever(question.text, cfg.k)
        if not ranked:
            return []
        candidates, _ = aggregate_answers(
            question, ranked, self.extractor, cfg.reader_config(), self.corpus
        )
        if not candidates:
            return []
        if cfg.evidence_from_question_retrieval:
            question_hits = ranked
            evidence_retriever: Retriever = lambda query, k: question_hits[:k]
        else:
            evidence_retriever = retriever
        predictions = []
        for candidate in candidates:
            claim = make_claim(question, candidate.display_text)
            mined = self._mine(claim, evidence_retriever, cfg)
            predictions.append(
                EntityPrediction(
                    answer=candidate.display_text,
                    supporting=mined.supporting,
                    refuting=mined.refuting,
                )
            )
        return predictions

    def answer_yesno_question(self, question: Question, cfg: PipelineConfig) -> YesNoPrediction:
        """Mine the positive claim; supporting means YES, refuting means NO."""
        if question.qtype is not QType.YESNO:
            raise ValueError(f"question {question.id} is not a yes/no question")
        claim = make_claim(question, "yes")
        retriever = self.retriever_for(cfg, question)
        mined = self._mine(claim, retriever, cfg)
        verdicts: set[Verdict] = set()
        if mined.supporting:
            verdicts.add(Verdict.YES)
        if mined.refuting:
            verdicts.add(Verdict.NO)
        if not verdicts:
            verdicts.add(Verdict.NOT_SURE)
        return YesNoPrediction(
            verdicts=verdicts, yes_evidence=mined.supporting, no_evidence=mined.refuting
        )

    def answer(self, question: Question, cfg: PipelineConfig) -> dict:
        """Answer one question and serialize to a prediction-dump record."""
        if question.qtype is QType.ENTITY:
            return entity_record(question, self.answer_entity_question(question, cfg))
        return yesno_record(question, self.answer_yesno_question(question, cfg))

    def run_dataset(
        self,
        cfg: PipelineConfig,
        limit: int | None = None,
        qtype: QType | None = None,
        workers: int | None = None,
    ) -> Iterator[dict]:
        """Prediction-dump records for every dataset question (file order).

        Questions are independent, so they fan out over ``workers`` threads
        (default: available cores); records are yielded in dataset order
        regardless of completion order.
        """
        if self.dataset is None:
            raise ValueError("run_dataset requires a loaded dataset")
        selected = []
        for entry in self.dataset:
            if qtype is not None and entry.question.qtype is not qtype:
                continue
            if limit is not None and len(selected) >= limit:
                break
            selected.append(entry)
        workers = workers or os.cpu_count() or 1
        if workers <= 1 or len(selected) <= 1:
            for entry in selected:
                yield self.answer(entry.question, cfg)
            return
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(lambda entry: self.answer(entry.question, cfg), selected)

    def retrieval_records(
        self, k: int, cfg: PipelineConfig, limit: int | None = None, qtype: QType | None = None
    ) -> Iterator[dict]:
        """Top-k retrieval dump per question, for Hits@k / MHits@k evaluation."""
        if self.dataset is None:
            raise ValueError("retrieval_records requires a loaded dataset")
        emitted = 0
        for entry in self.dataset:
            if qtype is not None and entry.question.qtype is not qtype:
                continue
            if limit is not None and emitted >= limit:
                break
            retriever = self.retriever_for(cfg, entry.question)
            ranked = retriever(entry.question.text, k)
            yield {
                "question_id": entry.question.id,
                "ranked": [{"tweet_id": hit.tweet_id, "score": hit.score} for hit in ranked],
            }
            emitted += 1

    def stance_records(self, limit: int | None = None) -> Iterator[dict]:
        """Classify every annotated (claim, tweet) pair against its gold label."""
        if self.dataset is None:
            raise ValueError("stance_records requires a loaded dataset")
        emitted = 0
        for entry in self.dataset:
            if limit is not None and emitted >= limit:
                break
            for answer in entry.answers:
                claim = make_claim(entry.question, answer.text)
                labeled = (
                    [(tid, "supporting") for tid in sorted(answer.supporting)]
                    + [(tid, "refuting") for tid in sorted(answer.refuting)]
                    + [(tid, "neutral") for tid in sorted(answer.neutral)]
                )
                tweets = [self.corpus.get(tid) for tid, _ in labeled]
                judgments = self.scorer.classify_batch(claim, tweets)
                for (tid, gold), judgment in zip(labeled, judgments):
                    yield {
                        "question_id": entry.question.id,
                        "answer": answer.text,
                        "tweet_id": tid,
                        "pred": judgment.label.value,
                        "gold": gold,
                    }
            emitted += 1


def _evidence_json(evidence: list[StanceEvidence]) -> list[dict]:
    return [
        {
            "tweet_id": ev.tweet_id,
            "label": ev.label.value,
            "stance_score": ev.stance_score,
            "retrieval_score": ev.retrieval_score,
        }
        for ev in evidence
    ]


def entity_record(question: Question, predictions: list[EntityPrediction]) -> dict:
    return {
        "question_id": question.id,
        "qtype": question.qtype.value,
        "predictions": [
            {
                "answer": p.answer,
                "supporting": _evidence_json(p.supporting),
                "refuting": _evidence_json(p.refuting),
            }
            for p in predictions
        ],
    }


def yesno_record(question: Question, prediction: YesNoPrediction) -> dict:
    return {
        "question_id": question.id,
        "qtype": question.qtype.value,
        "predictions": [
            {
                "verdicts": sorted(v.value for v in prediction.verdicts),
                "yes_evidence": _evidence_json(prediction.yes_evidence),
                "no_evidence": _evidence_json(prediction.no_evidence),
            }
        ],
    }
