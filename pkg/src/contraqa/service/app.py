"""FastAPI service holding a loaded workspace (corpus + indexes + dataset)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from contraqa import __version__
from contraqa.corpus import (
    Corpus,
    Dataset,
    QType,
    Question,
    corpus_stats,
    load_corpus,
    load_dataset,
    save_corpus,
)
from contraqa.errors import ContraqaError, TransportError
from contraqa.gold import GoldOracleScorer, gold_extractor
from contraqa.manifest import build_manifest, write_manifest
from contraqa.metrics import (
    evaluate_predictions,
    evaluate_retrieval,
    evaluate_stance_dump,
    format_report_table,
    merge_reports,
)
from contraqa.pipeline import PipelineConfig, QAEngine
from contraqa.reader import MockExtractor
from contraqa.remote import RemoteEmbeddingProvider, RemoteExtractor, RemoteScorer, SidecarClient
from contraqa.retrieval import (
    DenseIndex,
    HashingEmbeddingProvider,
    InvertedIndex,
    bm25_search,
    build_dense_index,
    build_index,
    corpus_retriever,
    dense_search,
    load_dense_index,
    load_index,
    save_dense_index,
    save_index,
)
from contraqa.service import schemas
from contraqa.stance import LexicalBaselineScorer
from contraqa.suggest import SuggestConfig, suggest_candidates

CORPUS_FILE = "corpus.jsonl"
INDEX_FILE = "index.json.gz"
DENSE_FILE = "dense.npz"
MANIFEST_FILE = "manifest.json"


@dataclass
class Workspace:
    corpus: Corpus | None = None
    index: InvertedIndex | None = None
    dense: DenseIndex | None = None
    dataset: Dataset | None = None

    def require_corpus(self) -> Corpus:
        if self.corpus is None:
            raise WorkspaceNotReady("no corpus loaded; call /workspace/load first")
        return self.corpus

    def require_index(self) -> InvertedIndex:
        if self.index is None:
            raise WorkspaceNotReady("no index loaded; call /workspace/load first")
        return self.index


class WorkspaceNotReady(ContraqaError):
    pass


def _resolve_corpus_file(corpus_dir: str | None, corpus: str | None) -> Path:
    if corpus:
        return Path(corpus)
    if corpus_dir:
        return Path(corpus_dir) / CORPUS_FILE
    raise ValueError("either corpus_dir or corpus must be given")


def _build_engine(ws: Workspace, opts: schemas.PipelineOptions) -> QAEngine:
    corpus = ws.require_corpus()
    index = ws.require_index()
    if opts.gold_oracle:
        if ws.dataset is None:
            raise ValueError("gold_oracle requires a loaded dataset")
        scorer = GoldOracleScorer(ws.dataset)
        extractor = gold_extractor(ws.dataset)
    elif opts.endpoint:
        client = SidecarClient(opts.endpoint)
        scorer = RemoteScorer(client, claim_as_premise=opts.claim_as_premise)
        extractor = RemoteExtractor(client)
    else:
        scorer = LexicalBaselineScorer()
        extractor = MockExtractor.from_jsonl(opts.fixtures) if opts.fixtures else MockExtractor()
    dense_provider = None
    if opts.retriever == "dense" and ws.dense is not None:
        if opts.endpoint:
            dense_provider = RemoteEmbeddingProvider(SidecarClient(opts.endpoint))
        else:
            dense_provider = HashingEmbeddingProvider(dim=ws.dense.dim)
    return QAEngine(
        corpus,
        index,
        scorer,
        extractor=extractor,
        dataset=ws.dataset,
        dense_index=ws.dense,
        dense_provider=dense_provider,
    )


def _pipeline_config(opts: schemas.PipelineOptions) -> PipelineConfig:
    return PipelineConfig(
        k=opts.k,
        m=opts.m,
        e=opts.e,
        retrieval_weight=opts.retrieval_weight,
        mode=opts.mode,
        retriever=opts.retriever,
        evidence_from_question_retrieval=opts.evidence_from_question_retrieval,
        stance_blend=opts.stance_blend,
    )


def create_app(workspace: Workspace | None = None) -> FastAPI:
    ws = workspace if workspace is not None else Workspace()
    app = FastAPI(title="contraqa", version=__version__)
    app.state.workspace = ws

    @app.exception_handler(WorkspaceNotReady)
    async def _not_ready(_: Request, exc: WorkspaceNotReady):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(TransportError)
    async def _transport(_: Request, exc: TransportError):
        return JSONResponse(status_code=502, content={"detail": str(exc), "offset": exc.offset})

    @app.exception_handler(ContraqaError)
    async def _domain(_: Request, exc: ContraqaError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value(_: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(
            version=__version__,
            corpus_size=len(ws.corpus) if ws.corpus is not None else None,
            index_loaded=ws.index is not None,
            dense_loaded=ws.dense is not None,
            dataset_questions=len(ws.dataset) if ws.dataset is not None else None,
        )

    @app.post("/workspace/ingest", response_model=schemas.IngestResponse)
    def ingest(req: schemas.IngestRequest) -> schemas.IngestResponse:
        corpus = load_corpus(req.corpus)
        out_dir = Path(req.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        corpus_file = out_dir / CORPUS_FILE
        save_corpus(corpus, corpus_file)
        manifest = build_manifest("ingest", {"corpus": req.corpus, "out": req.out}, {"corpus": req.corpus})
        manifest_file = out_dir / MANIFEST_FILE
        write_manifest(manifest, manifest_file)
        counts = corpus.ingest_counts
        return schemas.IngestResponse(
            lines=counts.lines,
            kept=counts.kept,
            retweets_dropped=counts.retweets_dropped,
            duplicates_dropped=counts.duplicates_dropped,
            empty_dropped=counts.empty_dropped,
            corpus_file=str(corpus_file),
            manifest_file=str(manifest_file),
        )

    @app.post("/workspace/index", response_model=schemas.IndexResponse)
    def index(req: schemas.IndexRequest) -> schemas.IndexResponse:
        corpus_file = _resolve_corpus_file(req.corpus_dir, req.corpus)
        corpus = load_corpus(corpus_file)
        inv = build_index(corpus, k1=req.k1, b=req.b)
        out_dir = Path(req.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        index_file = out_dir / INDEX_FILE
        save_index(inv, index_file)
        dense_file = None
        if req.dense:
            if req.endpoint:
                provider = RemoteEmbeddingProvider(SidecarClient(req.endpoint))
            elif req.hashing_dim:
                provider = HashingEmbeddingProvider(dim=req.hashing_dim)
            else:
                raise ValueError("dense index build requires an embedding endpoint")
            dense = build_dense_index(corpus, provider)
            dense_file = out_dir / DENSE_FILE
            save_dense_index(dense, dense_file)
        manifest = build_manifest(
            "index",
            {"k1": req.k1, "b": req.b, "dense": req.dense, "endpoint": req.endpoint},
            {"corpus": corpus_file},
        )
        manifest_file = out_dir / MANIFEST_FILE
        write_manifest(manifest, manifest_file)
        return schemas.IndexResponse(
            documents=inv.doc_count,
            terms=len(inv.postings),
            avg_doc_length=inv.avg_doc_length,
            index_file=str(index_file),
            dense_file=str(dense_file) if dense_file else None,
            manifest_file=str(manifest_file),
        )

    @app.post("/workspace/load", response_model=schemas.LoadResponse)
    def load(req: schemas.LoadRequest) -> schemas.LoadResponse:
        corpus_file = _resolve_corpus_file(req.corpus_dir, req.corpus)
        ws.corpus = load_corpus(corpus_file)
        if req.index_dir:
            index_file = Path(req.index_dir) / INDEX_FILE
            ws.index = load_index(index_file)
            dense_file = Path(req.index_dir) / DENSE_FILE
            ws.dense = load_dense_index(dense_file) if dense_file.exists() else None
        elif req.build_index:
            ws.index = build_index(ws.corpus)
            ws.dense = None
        else:
            ws.index = None
            ws.dense = None
        stats = None
        if req.dataset:
            ws.dataset = load_dataset(req.dataset, ws.corpus)
            stats = corpus_stats(ws.dataset)
        else:
            ws.dataset = None
        return schemas.LoadResponse(
            corpus_size=len(ws.corpus),
            index_loaded=ws.index is not None,
            dense_loaded=ws.dense is not None,
            dataset_questions=len(ws.dataset) if ws.dataset is not None else None,
            dataset_stats=schemas.DatasetStats(**stats.__dict__) if stats else None,
        )

    @app.post("/search", response_model=schemas.SearchResponse)
    def search(req: schemas.SearchRequest) -> schemas.SearchResponse:
        corpus = ws.require_corpus()
        if req.method == "dense":
            if ws.dense is None:
                raise WorkspaceNotReady("no dense index loaded")
            if req.endpoint:
                provider = RemoteEmbeddingProvider(SidecarClient(req.endpoint))
            elif req.hashing_dim:
                provider = HashingEmbeddingProvider(dim=req.hashing_dim)
            else:
                raise ValueError("dense search needs the embedding provider the index was built with")
            hits = dense_search(ws.dense, provider, req.query, req.k)
        else:
            hits = bm25_search(ws.require_index(), req.query, req.k)
        return schemas.SearchResponse(
            results=[
                schemas.SearchHit(tweet_id=h.tweet_id, score=h.score, text=corpus.get(h.tweet_id).text)
                for h in hits
            ]
        )

    @app.post("/ask", response_model=schemas.AskResponse)
    def ask(req: schemas.AskRequest) -> schemas.AskResponse:
        qtype = QType(req.qtype)
        question = Question(id=req.question_id or "q0", text=req.question, qtype=qtype)
        engine = _build_engine(ws, req)
        cfg = _pipeline_config(req)
        record = engine.answer(question, cfg)
        manifest = build_manifest("ask", req.model_dump(), {})
        return schemas.AskResponse(
            question_id=record["question_id"],
            qtype=record["qtype"],
            predictions=record["predictions"],
            manifest=manifest,
        )

    @app.post("/run", response_model=schemas.RunResponse)
    def run(req: schemas.RunRequest) -> schemas.RunResponse:
        if ws.dataset is None:
            raise WorkspaceNotReady("run requires a loaded dataset")
        engine = _build_engine(ws, req)
        cfg = _pipeline_config(req)
        qtype = QType(req.qtype) if req.qtype else None
        questions = 0
        if req.predictions_out:
            with open(req.predictions_out, "w", encoding="utf-8") as fh:
                for record in engine.run_dataset(
                    cfg, limit=req.limit, qtype=qtype, workers=req.workers
                ):
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                    questions += 1
        if req.retrieval_out:
            with open(req.retrieval_out, "w", encoding="utf-8") as fh:
                for record in engine.retrieval_records(
                    req.retrieval_k or cfg.k, cfg, limit=req.limit, qtype=qtype
                ):
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        stance_pairs = None
        if req.stance_out:
            stance_pairs = 0
            with open(req.stance_out, "w", encoding="utf-8") as fh:
                for record in engine.stance_records(limit=req.limit):
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                    stance_pairs += 1
        manifest_file = None
        for out in (req.predictions_out, req.retrieval_out, req.stance_out):
            if out:
                manifest_file = str(Path(out).with_suffix(Path(out).suffix + ".manifest.json"))
                write_manifest(build_manifest("run", req.model_dump(), {}), manifest_file)
                break
        return schemas.RunResponse(
            questions=questions,
            predictions_out=req.predictions_out,
            retrieval_out=req.retrieval_out,
            stance_out=req.stance_out,
            stance_pairs=stance_pairs,
            manifest_file=manifest_file,
        )

    @app.post("/eval", response_model=schemas.EvalResponse)
    def eval_cmd(req: schemas.EvalRequest) -> schemas.EvalResponse:
        corpus = ws.require_corpus()
        dataset = load_dataset(req.dataset, corpus)

        def read_jsonl(path: str) -> list[dict]:
            with open(path, encoding="utf-8") as fh:
                return [json.loads(line) for line in fh if line.strip()]

        pred_report = None
        if req.predictions:
            pred_report = evaluate_predictions(dataset, read_jsonl(req.predictions), req.e)
        retrieval_report = None
        if req.retrieval:
            retrieval_report = evaluate_retrieval(dataset, read_jsonl(req.retrieval), req.k)
        stance_report = None
        if req.stance:
            stance_report = evaluate_stance_dump(read_jsonl(req.stance))
        report = merge_reports(pred_report, retrieval_report, stance_report)
        manifest = build_manifest(
            "eval",
            {"e": req.e, "k": req.k},
            {
                name: path
                for name, path in {
                    "dataset": req.dataset,
                    "predictions": req.predictions,
                    "retrieval": req.retrieval,
                    "stance": req.stance,
                }.items()
                if path
            },
        )
        return schemas.EvalResponse(
            report=report.to_json(), table=format_report_table(report), manifest=manifest
        )

    @app.post("/suggest", response_model=schemas.SuggestResponse)
    def suggest(req: schemas.SuggestRequest) -> schemas.SuggestResponse:
        corpus = ws.require_corpus()
        index = ws.require_index()
        cfg = SuggestConfig(
            pool_size=req.pool_size,
            clusters=req.clusters,
            per_cluster=req.per_cluster,
            kmeans_iters=req.kmeans_iters,
            seed=req.seed,
        )
        if req.endpoint:
            provider = RemoteEmbeddingProvider(SidecarClient(req.endpoint))
        elif req.hashing_dim:
            provider = HashingEmbeddingProvider(dim=req.hashing_dim)
        else:
            provider = None
        suggestions = suggest_candidates(
            req.template,
            req.aliases,
            corpus,
            corpus_retriever(index),
            cfg=cfg,
            provider=provider,
        )
        out_path = None
        manifest_file = None
        if req.out:
            out_path = req.out
            with open(out_path, "w", encoding="utf-8") as fh:
                for s in suggestions:
                    fh.write(json.dumps(s.to_json(), ensure_ascii=False) + "\n")
            manifest_file = str(Path(out_path).with_suffix(Path(out_path).suffix + ".manifest.json"))
            write_manifest(build_manifest("suggest", req.model_dump(), {}), manifest_file)
        return schemas.SuggestResponse(
            suggestions=[schemas.SuggestionOut(**s.to_json()) for s in suggestions],
            out=out_path,
            manifest_file=manifest_file,
        )

    return app


app = create_app()
