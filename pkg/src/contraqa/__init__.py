"""contraqa: multi-answer QA over a tweet corpus with contradictory-evidence mining.

Answers factoid questions against a local tweet corpus, mines supporting and
refuting tweets for every distinct answer, and flags answers backed by
contradictory evidence as check-worthy claims. Ships with the full evaluation
metric suite (answer F1, evidence-aware F1, Hits@k / MHits@k, stance P/R/F).
"""

__version__ = "0.1.0"

from contraqa.corpus import Corpus, Dataset, Question, Tweet, load_corpus, load_dataset
from contraqa.pipeline import PipelineConfig, QAEngine

__all__ = [
    "__version__",
    "Corpus",
    "Dataset",
    "Question",
    "Tweet",
    "load_corpus",
    "load_dataset",
    "PipelineConfig",
    "QAEngine",
]
