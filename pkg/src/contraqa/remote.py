"""HTTP clients for the inference sidecar (/nli, /embed, /extract)."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import httpx
import numpy as np

from contraqa.corpus import Question, Tweet
from contraqa.errors import TransportError
from contraqa.reader import AnswerSpan
from contraqa.stance import Claim, StanceJudgment, StanceLabel, map_nli_label

DEFAULT_TIMEOUT = 60.0

# NLI score vectors arrive in this fixed order.
_NLI_SCORE_ORDER = (StanceLabel.SUPPORTING, StanceLabel.NEUTRAL, StanceLabel.REFUTING)


class SidecarClient:
    """Thin JSON-over-HTTP client; raises TransportError on any failure."""

    def __init__(
        self,
        base_url: str,
        timeout: float = DEFAULT_TIMEOUT,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self._client = httpx.Client(base_url=self.base_url, timeout=timeout, transport=transport)

    def _post(self, path: str, payload: dict, offset: int | None = None) -> dict:
        try:
            response = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise TransportError(f"POST {path} failed: {exc}", offset=offset) from exc
        if response.status_code != 200:
            raise TransportError(
                f"POST {path} returned {response.status_code}: {response.text[:200]}",
                offset=offset,
            )
        try:
            return response.json()
        except ValueError as exc:
            raise TransportError(f"POST {path} returned a non-JSON body", offset=offset) from exc

    def health(self) -> dict:
        try:
            response = self._client.get("/health")
        except httpx.HTTPError as exc:
            raise TransportError(f"GET /health failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(f"GET /health returned {response.status_code}")
        return response.json()

    def nli(self, pairs: list[tuple[str, str]], offset: int | None = None) -> list[dict]:
        payload = {"pairs": [{"premise": p, "hypothesis": h} for p, h in pairs]}
        body = self._post("/nli", payload, offset=offset)
        results = body.get("results")
        if not isinstance(results, list) or len(results) != len(pairs):
            raise TransportError("malformed /nli response: results length mismatch", offset=offset)
        return results

    def embed(self, texts: Sequence[str], offset: int | None = None) -> np.ndarray:
        body = self._post("/embed", {"texts": list(texts)}, offset=offset)
        vectors = body.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise TransportError("malformed /embed response: vectors length mismatch", offset=offset)
        return np.asarray(vectors, dtype=np.float64)

    def extract(self, question: str, contexts: Sequence[str], offset: int | None = None) -> list[list[dict]]:
        body = self._post("/extract", {"question": question, "contexts": list(contexts)}, offset=offset)
        spans = body.get("spans")
        if not isinstance(spans, list) or len(spans) != len(contexts):
            raise TransportError("malformed /extract response: spans length mismatch", offset=offset)
        return spans

    def close(self) -> None:
        self._client.close()


class RemoteScorer:
    """Stance scoring through the sidecar's zero-shot NLI endpoint.

    Default orientation: premise = tweet (evidence), hypothesis = claim (the
    standard fact-verification direction); switchable for reproduction runs.
    Batches run with at most ``max_in_flight`` concurrent requests; any batch
    failure aborts the whole call (no partial results).
    """

    def __init__(
        self,
        client: SidecarClient,
        claim_as_premise: bool = False,
        batch_size: int = 32,
        max_in_flight: int = 4,
    ):
        self.client = client
        self.claim_as_premise = claim_as_premise
        self.batch_size = batch_size
        self.max_in_flight = max_in_flight

    def _judgment(self, result: dict) -> StanceJudgment:
        label = map_nli_label(result["label"])
        raw_scores = result.get("scores", [0.0, 0.0, 0.0])
        scores = {lab: float(s) for lab, s in zip(_NLI_SCORE_ORDER, raw_scores)}
        return StanceJudgment(label=label, scores=scores)

    def classify_batch(self, claim: Claim, tweets: Sequence[Tweet]) -> list[StanceJudgment]:
        if not tweets:
            return []
        if self.claim_as_premise:
            pairs = [(claim.text, tweet.text) for tweet in tweets]
        else:
            pairs = [(tweet.text, claim.text) for tweet in tweets]
        offsets = list(range(0, len(pairs), self.batch_size))
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            batches = pool.map(
                lambda off: self.client.nli(pairs[off : off + self.batch_size], offset=off),
                offsets,
            )
            results = [item for batch in batches for item in batch]
        try:
            return [self._judgment(r) for r in results]
        except (KeyError, TypeError, ValueError) as exc:
            raise TransportError(f"malformed /nli result: {exc}") from exc


class RemoteExtractor:
    """Span extraction through the sidecar's MRC endpoint (best span wins)."""

    def __init__(self, client: SidecarClient, is_generative: bool = False):
        self.client = client
        self.is_generative = is_generative

    def extract_one(self, question: Question, tweet: Tweet) -> AnswerSpan | None:
        spans = self.client.extract(question.text, [tweet.text])[0]
        if not spans:
            return None
        best = max(spans, key=lambda s: float(s.get("score", 0.0)))
        return AnswerSpan(text=str(best["text"]), span_score=float(best.get("score", 0.0)))


class RemoteEmbeddingProvider:
    """EmbeddingProvider backed by the sidecar's /embed endpoint."""

    def __init__(self, client: SidecarClient, batch_size: int = 64):
        self.client = client
        self.batch_size = batch_size
        self.dim = int(client.health().get("dim", 0))

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim))
        chunks = [
            self.client.embed(texts[i : i + self.batch_size], offset=i)
            for i in range(0, len(texts), self.batch_size)
        ]
        out = np.vstack(chunks)
        if self.dim == 0:
            self.dim = out.shape[1]
        return out
