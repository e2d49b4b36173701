"""FastAPI app wiring a backend to the three inference endpoints."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from modelserver import schemas
from modelserver.backends import Backend, ModelNotLoaded, StubBackend


def create_app(backend: Backend | None = None) -> FastAPI:
    backend = backend if backend is not None else StubBackend()
    app = FastAPI(title="modelserver")
    app.state.backend = backend

    @app.exception_handler(RequestValidationError)
    async def _schema_violation(_: Request, exc: RequestValidationError):
        # The wire contract promises 400 on schema violations.
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(ModelNotLoaded)
    async def _not_loaded(_: Request, exc: ModelNotLoaded):
        return JSONResponse(status_code=503, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", models=backend.info(), dim=backend.dim)

    @app.post("/nli", response_model=schemas.NliResponse)
    def nli(request: schemas.NliRequest) -> schemas.NliResponse:
        results = backend.nli([(pair.premise, pair.hypothesis) for pair in request.pairs])
        return schemas.NliResponse(
            results=[schemas.NliResult(label=label, scores=scores) for label, scores in results]
        )

    @app.post("/embed", response_model=schemas.EmbedResponse)
    def embed(request: schemas.EmbedRequest) -> schemas.EmbedResponse:
        vectors = backend.embed(request.texts)
        return schemas.EmbedResponse(
            vectors=[[float(x) for x in row] for row in vectors],
            dim=int(vectors.shape[1]) if vectors.size else backend.dim,
        )

    @app.post("/extract", response_model=schemas.ExtractResponse)
    def extract(request: schemas.ExtractRequest) -> schemas.ExtractResponse:
        spans = backend.extract(request.question, request.contexts)
        return schemas.ExtractResponse(
            spans=[
                [schemas.Span(text=s["text"], score=s["score"]) for s in context_spans]
                for context_spans in spans
            ]
        )

    return app


app = create_app()
