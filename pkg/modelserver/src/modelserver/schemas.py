"""Wire schemas. These are the bit-exact contract with clients."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel

NLI_LABELS = ("entailment", "neutral", "contradiction")


class NliPair(BaseModel):
    premise: str
    hypothesis: str


class NliRequest(BaseModel):
    pairs: list[NliPair]


class NliResult(BaseModel):
    label: Literal["entailment", "neutral", "contradiction"]
    # Scores in the fixed order entailment, neutral, contradiction.
    scores: list[float]


class NliResponse(BaseModel):
    results: list[NliResult]


class EmbedRequest(BaseModel):
    texts: list[str]


class EmbedResponse(BaseModel):
    vectors: list[list[float]]
    dim: int


class ExtractRequest(BaseModel):
    question: str
    contexts: list[str]


class Span(BaseModel):
    text: str
    score: float


class ExtractResponse(BaseModel):
    # One span list per context, best span first.
    spans: list[list[Span]]


class HealthResponse(BaseModel):
    status: str
    models: dict[str, str]
    dim: int
