"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str
    corpus_size: int | None = None
    index_loaded: bool = False
    dense_loaded: bool = False
    dataset_questions: int | None = None


class IngestRequest(BaseModel):
    corpus: str
    out: str


class IngestResponse(BaseModel):
    lines: int
    kept: int
    retweets_dropped: int
    duplicates_dropped: int
    empty_dropped: int
    corpus_file: str
    manifest_file: str


class IndexRequest(BaseModel):
    corpus_dir: str | None = None
    corpus: str | None = None
    out: str
    dense: bool = False
    endpoint: str | None = None
    hashing_dim: int | None = None  # model-free dense index for demos/tests
    k1: float = 0.9
    b: float = 0.4


class IndexResponse(BaseModel):
    documents: int
    terms: int
    avg_doc_length: float
    index_file: str
    dense_file: str | None = None
    manifest_file: str


class LoadRequest(BaseModel):
    corpus_dir: str | None = None
    corpus: str | None = None
    index_dir: str | None = None
    dataset: str | None = None
    build_index: bool = True  # build in-memory when no index_dir is given


class DatasetStats(BaseModel):
    questions_by_type: dict[str, int]
    avg_answers_by_type: dict[str, float]
    evidence_counts: dict[str, int]
    evidence_percentages: dict[str, float]


class LoadResponse(BaseModel):
    corpus_size: int
    index_loaded: bool
    dense_loaded: bool
    dataset_questions: int | None = None
    dataset_stats: DatasetStats | None = None


class SearchRequest(BaseModel):
    query: str
    k: int = Field(default=10, ge=1)
    method: str = "bm25"  # "bm25" | "dense"
    endpoint: str | None = None  # embedding sidecar; must match the index build
    hashing_dim: int | None = None


class SearchHit(BaseModel):
    tweet_id: str
    score: float
    text: str | None = None


class SearchResponse(BaseModel):
    results: list[SearchHit]


class PipelineOptions(BaseModel):
    k: int = Field(default=100, ge=1)
    m: int = Field(default=5, ge=1)
    e: int = Field(default=10, ge=1)
    retrieval_weight: float = Field(default=0.5, ge=0.0, le=1.0)
    mode: str = "extrinsic"  # "extrinsic" | "intrinsic"
    retriever: str = "bm25"
    evidence_from_question_retrieval: bool = False
    stance_blend: float = 0.0
    endpoint: str | None = None  # inference sidecar; falls back to the lexical baseline
    claim_as_premise: bool = False  # flip the NLI premise/hypothesis orientation
    fixtures: str | None = None  # mock-extractor fixture JSONL
    gold_oracle: bool = False  # dataset-backed oracle scorer + extractor


class AskRequest(PipelineOptions):
    question: str
    qtype: str  # "entity" | "yesno"
    question_id: str | None = None


class EvidenceOut(BaseModel):
    tweet_id: str
    label: str
    stance_score: float
    retrieval_score: float


class AskResponse(BaseModel):
    question_id: str
    qtype: str
    predictions: list[dict]
    manifest: dict | None = None


class RunRequest(PipelineOptions):
    predictions_out: str | None = None
    retrieval_out: str | None = None
    retrieval_k: int | None = None
    stance_out: str | None = None
    limit: int | None = None
    qtype: str | None = None
    workers: int | None = None  # parallel question processing; default: cores


class RunResponse(BaseModel):
    questions: int
    predictions_out: str | None = None
    retrieval_out: str | None = None
    stance_out: str | None = None
    stance_pairs: int | None = None
    manifest_file: str | None = None


class EvalRequest(BaseModel):
    dataset: str
    predictions: str | None = None
    retrieval: str | None = None
    stance: str | None = None
    e: list[int] = Field(default_factory=lambda: [1, 10, 100])
    k: list[int] = Field(default_factory=lambda: [100, 1000])


class EvalResponse(BaseModel):
    report: dict
    table: str
    manifest: dict | None = None


class SuggestRequest(BaseModel):
    template: str
    aliases: list[str]
    pool_size: int = 1000
    clusters: int = 5
    per_cluster: int = 20
    kmeans_iters: int = 50
    seed: int = 0
    endpoint: str | None = None  # embedding sidecar; omit for BM25 fallback
    hashing_dim: int | None = None  # model-free embedding provider for demos
    out: str | None = None


class SuggestionOut(BaseModel):
    id: str
    text: str
    cluster: int
    similarity: float


class SuggestResponse(BaseModel):
    suggestions: list[SuggestionOut]
    out: str | None = None
    manifest_file: str | None = None
