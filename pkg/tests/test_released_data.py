"""Checks against the released full-scale dataset, when present.

These pin the dataset-level statistics the loaders must reproduce. They run
only when MYTHQA_DATA_DIR points at a directory holding corpus.jsonl and
dataset.json in the documented formats.
"""

import os

import pytest

from contraqa.corpus import QType, corpus_stats, load_corpus, load_dataset

DATA_DIR = os.environ.get("MYTHQA_DATA_DIR")

pytestmark = pytest.mark.skipif(
    not DATA_DIR, reason="set MYTHQA_DATA_DIR to run released-data checks"
)


@pytest.fixture(scope="module")
def released():
    corpus = load_corpus(os.path.join(DATA_DIR, "corpus.jsonl"))
    dataset = load_dataset(os.path.join(DATA_DIR, "dataset.json"), corpus)
    return corpus, dataset


def test_question_counts(released):
    _, dataset = released
    assert len(dataset) == 522
    entity = sum(1 for e in dataset if e.question.qtype is QType.ENTITY)
    assert entity == 114
    assert len(dataset) - entity == 408


def test_average_answers_per_question(released):
    _, dataset = released
    stats = corpus_stats(dataset)
    assert stats.avg_answers_by_type["entity"] == pytest.approx(3.43, abs=0.005)
    assert stats.avg_answers_by_type["yesno"] == pytest.approx(2.0)


def test_stance_evidence_distribution(released):
    _, dataset = released
    stats = corpus_stats(dataset)
    assert stats.evidence_counts["supporting"] == 2318
    assert stats.evidence_counts["refuting"] == 1980
    assert stats.evidence_counts["neutral"] == 984
    assert stats.evidence_percentages["supporting"] == pytest.approx(43.88, abs=0.01)
    assert stats.evidence_percentages["refuting"] == pytest.approx(37.49, abs=0.01)
    assert stats.evidence_percentages["neutral"] == pytest.approx(18.63, abs=0.01)
