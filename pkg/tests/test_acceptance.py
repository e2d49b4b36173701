"""Acceptance gate: one test per release criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
The full-corpus retrieval criterion needs the released data (see README) and
is skipped when the MYTHQA_DATA_DIR environment variable is unset.
"""

import os
import random
import time
from contextlib import contextmanager

import pytest

from contraqa.corpus import GoldAnswer, QType, load_corpus, load_dataset
from contraqa.gold import GoldOracleScorer, gold_extractor
from contraqa.metrics import (
    evaluate_predictions,
    evaluate_retrieval,
    f1_ans,
    f1_contro_at_e,
    hits_at_k,
    mhits_at_k,
)
from contraqa.pipeline import Mode, PipelineConfig, QAEngine, Verdict
from contraqa.retrieval import build_index, bm25_search, tokenize
from contraqa.stance import StanceJudgment, StanceLabel

import oracles
from fixture_data import fixture_objects


@contextmanager
def criterion(name: str, budget_seconds: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = time.perf_counter() - start
    if elapsed > budget_seconds:
        print(f"[FAIL] {name} (runtime {elapsed:.2f}s > {budget_seconds}s)")
        raise AssertionError(f"{name}: runtime budget exceeded ({elapsed:.2f}s)")
    print(f"[PASS] {name} ({elapsed:.2f}s)")


VOCAB = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
IDS = [f"d{i}" for i in range(10)]


def random_instance(rng: random.Random):
    n = rng.randint(1, 5)
    golds = [
        GoldAnswer(
            text=answer,
            supporting=frozenset(rng.sample(IDS, rng.randint(0, 3))),
            refuting=frozenset(rng.sample(IDS, rng.randint(0, 3))),
        )
        for answer in rng.sample(VOCAB, n)
    ]
    preds = [
        (rng.choice(VOCAB), rng.sample(IDS, rng.randint(0, 3)), rng.sample(IDS, rng.randint(0, 3)))
        for _ in range(rng.randint(0, 5))
    ]
    ranked = rng.sample(IDS, rng.randint(0, 10))
    return preds, golds, ranked


def test_metric_oracle_equivalence():
    with criterion("metric-oracle equivalence (1000 random instances, exact)", 5.0):
        rng = random.Random(1234)
        for _ in range(1000):
            preds, golds, ranked = random_instance(rng)
            oracle_golds = [(g.text, g.supporting, g.refuting) for g in golds]
            for mode, yesno in ((QType.ENTITY, False), (QType.YESNO, True)):
                assert f1_ans(preds, golds, mode) == oracles.f1_ans_direct(
                    preds, oracle_golds, yesno
                )
                for e in (1, 2, 3):
                    assert f1_contro_at_e(preds, golds, e, mode) == oracles.f1_contro_direct(
                        preds, oracle_golds, e, yesno
                    )
            for k in (1, 2, 3, 5, 10):
                assert hits_at_k(ranked, golds, k) == oracles.hits_direct(ranked, oracle_golds, k)
                assert mhits_at_k(ranked, golds, k) == oracles.mhits_direct(
                    ranked, oracle_golds, k
                )


TOY_DOCS = [
    "shoes spread covid fast in markets",
    "covid spreads through swimming water",
    "running shoes are comfortable shoes for covid times",
    "masks stop covid droplets",
    "swimming water is chlorinated and safe",
    "fake news about shoes and covid everywhere",
    "vaccines protect against severe covid",
    "the market sells shoes and masks",
    "droplets carry the virus between people",
    "chlorinated pools kill most germs quickly",
]


def test_bm25_against_direct_formula():
    with criterion("BM25 matches the direct-formula oracle on a 10-doc corpus", 1.0):
        from contraqa.corpus import Corpus, Tweet

        corpus = Corpus([Tweet(id=f"d{i}", text=t) for i, t in enumerate(TOY_DOCS)])
        index = build_index(corpus)
        assert (index.k1, index.b) == (0.9, 0.4)
        for query in ("shoes covid", "swimming water", "covid", "masks droplets", "shoes shoes"):
            oracle = oracles.bm25_scores_direct(
                [tokenize(t) for t in TOY_DOCS], tokenize(query), index.k1, index.b
            )
            results = bm25_search(index, query, k=10)
            got = {r.tweet_id: r.score for r in results}
            for i, expected in enumerate(oracle):
                if expected > 0:
                    assert abs(got[f"d{i}"] - expected) <= 1e-9
                else:
                    assert f"d{i}" not in got
            expected_order = [
                doc_id
                for _, doc_id in sorted(
                    ((score, f"d{i}") for i, score in enumerate(oracle) if score > 0),
                    key=lambda t: (-t[0], t[1]),
                )
            ]
            assert [r.tweet_id for r in results] == expected_order


def test_metric_order_properties():
    with criterion("metric order properties (500 random cases, zero violations)", 5.0):
        rng = random.Random(777)
        for _ in range(500):
            preds, golds, ranked = random_instance(rng)
            for mode in (QType.ENTITY, QType.YESNO):
                ans = f1_ans(preds, golds, mode)
                previous = 0.0
                for e in (1, 2, 3):
                    contro = f1_contro_at_e(preds, golds, e, mode)
                    assert contro <= ans
                    assert contro >= previous
                    previous = contro
            prev_hits = prev_mhits = 0.0
            for k in (1, 2, 4, 8, 10):
                hits = hits_at_k(ranked, golds, k)
                mhits = mhits_at_k(ranked, golds, k)
                assert mhits <= hits
                assert hits >= prev_hits
                assert mhits >= prev_mhits
                prev_hits, prev_mhits = hits, mhits


def test_oracle_end_to_end():
    with criterion(
        "oracle end-to-end: intrinsic F1_ans=100, yes/no recovery, F1_CONTRO@1=100", 10.0
    ):
        corpus, dataset = fixture_objects()
        assert len(dataset) == 20
        engine = QAEngine(
            corpus,
            build_index(corpus),
            scorer=GoldOracleScorer(dataset),
            extractor=gold_extractor(dataset),
            dataset=dataset,
        )
        cfg = PipelineConfig(k=100, m=5, e=10, mode=Mode.INTRINSIC)
        records = list(engine.run_dataset(cfg))
        report = evaluate_predictions(dataset, records, e_values=(1,))
        assert report.f1_ans == 100.0
        assert report.f1_contro[1] == 100.0
        assert report.by_qtype["entity"]["f1_ans"] == 100.0
        assert report.by_qtype["yesno"]["f1_ans"] == 100.0
        for entry in dataset:
            if entry.question.qtype is QType.YESNO:
                prediction = engine.answer_yesno_question(entry.question, cfg)
                assert prediction.verdicts == {Verdict.YES, Verdict.NO}


def test_yesno_verdict_invariant():
    with criterion("yes/no verdict invariant under 200 random scorers", 30.0):
        corpus, dataset = fixture_objects()
        index = build_index(corpus)
        yesno_entries = [e for e in dataset if e.question.qtype is QType.YESNO]
        seeds = random.Random(2024)

        class RandomScorer:
            def __init__(self, seed):
                self.rng = random.Random(seed)

            def classify_batch(self, claim, tweets):
                return [
                    StanceJudgment.from_scores(
                        {label: self.rng.random() for label in StanceLabel}
                    )
                    for _ in tweets
                ]

        for trial in range(200):
            entry = yesno_entries[trial % len(yesno_entries)]
            engine = QAEngine(corpus, index, RandomScorer(seeds.randint(0, 10**9)), dataset=dataset)
            cfg = PipelineConfig(k=20, m=2, e=3, mode=Mode.EXTRINSIC)
            prediction = engine.answer_yesno_question(entry.question, cfg)
            not_sure = Verdict.NOT_SURE in prediction.verdicts
            assert not_sure == (not prediction.yes_evidence and not prediction.no_evidence)
            assert (Verdict.YES in prediction.verdicts) == bool(prediction.yes_evidence)
            assert (Verdict.NO in prediction.verdicts) == bool(prediction.no_evidence)
            if not_sure:
                assert prediction.verdicts == {Verdict.NOT_SURE}


RELEASED_DATA_ENV = "MYTHQA_DATA_DIR"


@pytest.mark.skipif(
    not os.environ.get(RELEASED_DATA_ENV),
    reason=f"released dataset not available; set {RELEASED_DATA_ENV} to a directory "
    "containing corpus.jsonl and dataset.json to run the retrieval reproduction",
)
def test_bm25_retrieval_reproduction_full_corpus():
    data_dir = os.environ[RELEASED_DATA_ENV]
    with criterion("BM25 reproduction: Hits@1K >= 97, MHits@1K within 2.0 of 98.58", 1800.0):
        corpus = load_corpus(os.path.join(data_dir, "corpus.jsonl"))
        dataset = load_dataset(os.path.join(data_dir, "dataset.json"), corpus)
        index = build_index(corpus)
        records = []
        for entry in dataset:
            ranked = bm25_search(index, entry.question.text, k=1000)
            records.append(
                {"question_id": entry.question.id, "ranked": [r.tweet_id for r in ranked]}
            )
        report = evaluate_retrieval(dataset, records, k_values=(1000,))
        assert report.hits[1000] >= 97.0
        assert abs(report.mhits[1000] - 98.58) <= 2.0
