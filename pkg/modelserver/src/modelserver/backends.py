"""Inference backends: a deterministic stub and an optional transformers stack."""

from __future__ import annotations

import math
import re
import threading
import zlib
from typing import Protocol, Sequence

import numpy as np


class ModelNotLoaded(RuntimeError):
    """Raised when a backend cannot serve a request; maps to HTTP 503."""


class Backend(Protocol):
    dim: int

    def info(self) -> dict[str, str]: ...

    def nli(self, pairs: Sequence[tuple[str, str]]) -> list[tuple[str, list[float]]]: ...

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...

    def extract(self, question: str, contexts: Sequence[str]) -> list[list[dict]]: ...


NLI_LABELS = ("entailment", "neutral", "contradiction")

_TOKEN_RE = re.compile(r"[a-z0-9]+")

_NEGATION_CUES = frozenset(
    {"fake", "false", "myth", "hoax", "debunked", "not", "no", "never", "cannot", "unlikely"}
)


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _softmax(logits: list[float]) -> list[float]:
    peak = max(logits)
    exps = [math.exp(x - peak) for x in logits]
    total = sum(exps)
    return [x / total for x in exps]


def _argmax_label(scores: list[float]) -> str:
    best = max(range(3), key=lambda i: (scores[i], -i))  # ties -> earlier label
    return NLI_LABELS[best]


class StubBackend:
    """Deterministic, dependency-free backend for wire-contract testing.

    NLI is a token-containment heuristic with negation cues; embeddings are
    signed feature hashes; extraction returns the longest non-question token
    runs. Fast, stable across runs, and shaped exactly like the real models.
    """

    def __init__(self, dim: int = 32, max_batch_size: int = 64):
        self.dim = dim
        self.max_batch_size = max_batch_size

    def info(self) -> dict[str, str]:
        return {"nli": "stub", "embed": f"stub-hash-{self.dim}", "extract": "stub"}

    def nli(self, pairs: Sequence[tuple[str, str]]) -> list[tuple[str, list[float]]]:
        out = []
        for premise, hypothesis in pairs:
            p_tokens = set(_tokens(premise))
            h_tokens = _tokens(hypothesis)
            overlap = (
                sum(1 for t in h_tokens if t in p_tokens) / len(h_tokens) if h_tokens else 0.0
            )
            negated = 1.0 if p_tokens & _NEGATION_CUES else 0.0
            logits = [
                2.0 * overlap * (1.0 - negated),  # entailment
                1.0 - overlap,  # neutral
                2.0 * overlap * negated,  # contradiction
            ]
            scores = _softmax(logits)
            out.append((_argmax_label(scores), scores))
        return out

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        vectors = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for token in _tokens(text):
                h = zlib.crc32(token.encode("utf-8"))
                sign = 1.0 if (h >> 16) & 1 else -1.0
                vectors[row, h % self.dim] += sign
            norm = float(np.linalg.norm(vectors[row]))
            if norm > 0:
                vectors[row] /= norm
        return vectors

    def extract(self, question: str, contexts: Sequence[str]) -> list[list[dict]]:
        q_tokens = set(_tokens(question))
        all_spans = []
        for context in contexts:
            words = context.split()
            runs: list[list[str]] = []
            current: list[str] = []
            for word in words:
                normed = _tokens(word)
                if normed and not set(normed) <= q_tokens:
                    current.append(word)
                elif current:
                    runs.append(current)
                    current = []
            if current:
                runs.append(current)
            candidates = []
            for run in runs:
                text = " ".join(run[:3])
                score = len(run) / (len(words) + 1.0)
                candidates.append({"text": text, "score": score})
            candidates.sort(key=lambda s: (-s["score"], s["text"]))
            all_spans.append(candidates[:2])
        return all_spans


DEFAULT_NLI_MODEL = "microsoft/deberta-large-mnli"
DEFAULT_EMBED_MODEL = "facebook/dpr-ctx_encoder-multiset-base"
DEFAULT_READER_MODEL = "facebook/dpr-reader-single-nq-base"


class TransformersBackend:
    """Frozen pretrained models behind the same wire contract.

    Models load lazily on first use and inference runs under a lock (torch
    modules are not thread-safe for concurrent forwards). Everything runs in
    eval mode with gradients off, so repeated requests are deterministic.
    """

    def __init__(
        self,
        nli_model: str = DEFAULT_NLI_MODEL,
        embed_model: str = DEFAULT_EMBED_MODEL,
        reader_model: str = DEFAULT_READER_MODEL,
        max_batch_size: int = 16,
        device: str = "cpu",
    ):
        self.nli_model_id = nli_model
        self.embed_model_id = embed_model
        self.reader_model_id = reader_model
        self.max_batch_size = max_batch_size
        self.device = device
        self.dim = 0
        self._lock = threading.Lock()
        self._nli = None
        self._embedder = None
        self._reader = None

    def info(self) -> dict[str, str]:
        return {
            "nli": self.nli_model_id,
            "embed": self.embed_model_id,
            "extract": self.reader_model_id,
        }

    def _torch(self):
        try:
            import torch

            return torch
        except ImportError as exc:
            raise ModelNotLoaded(f"torch is not installed: {exc}") from exc

    def _load_nli(self):
        if self._nli is None:
            torch = self._torch()
            try:
                from transformers import AutoModelForSequenceClassification, AutoTokenizer

                tokenizer = AutoTokenizer.from_pretrained(self.nli_model_id)
                model = AutoModelForSequenceClassification.from_pretrained(self.nli_model_id)
            except Exception as exc:
                raise ModelNotLoaded(f"cannot load NLI model {self.nli_model_id}: {exc}") from exc
            model.eval()
            model.to(self.device)
            id2label = {i: label.lower() for i, label in model.config.id2label.items()}
            order = []
            for wanted in ("entail", "neutral", "contradiction"):
                matches = [i for i, label in id2label.items() if wanted in label]
                if len(matches) != 1:
                    raise ModelNotLoaded(
                        f"cannot map labels of {self.nli_model_id}: {id2label}"
                    )
                order.append(matches[0])
            self._nli = (tokenizer, model, order, torch)
        return self._nli

    def nli(self, pairs: Sequence[tuple[str, str]]) -> list[tuple[str, list[float]]]:
        tokenizer, model, order, torch = self._load_nli()
        out: list[tuple[str, list[float]]] = []
        with self._lock, torch.no_grad():
            for start in range(0, len(pairs), self.max_batch_size):
                chunk = pairs[start : start + self.max_batch_size]
                encoded = tokenizer(
                    [p for p, _ in chunk],
                    [h for _, h in chunk],
                    padding=True,
                    truncation=True,
                    max_length=256,
                    return_tensors="pt",
                ).to(self.device)
                probs = torch.softmax(model(**encoded).logits, dim=-1).cpu().numpy()
                for row in probs:
                    scores = [float(row[i]) for i in order]
                    out.append((_argmax_label(scores), scores))
        return out

    def _load_embedder(self):
        if self._embedder is None:
            torch = self._torch()
            try:
                from transformers import AutoModel, AutoTokenizer

                tokenizer = AutoTokenizer.from_pretrained(self.embed_model_id)
                model = AutoModel.from_pretrained(self.embed_model_id)
            except Exception as exc:
                raise ModelNotLoaded(
                    f"cannot load embedding model {self.embed_model_id}: {exc}"
                ) from exc
            model.eval()
            model.to(self.device)
            self._embedder = (tokenizer, model, torch)
        return self._embedder

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        tokenizer, model, torch = self._load_embedder()
        chunks = []
        with self._lock, torch.no_grad():
            for start in range(0, len(texts), self.max_batch_size):
                chunk = list(texts[start : start + self.max_batch_size])
                encoded = tokenizer(
                    chunk, padding=True, truncation=True, max_length=256, return_tensors="pt"
                ).to(self.device)
                output = model(**encoded)
                if hasattr(output, "pooler_output") and output.pooler_output is not None:
                    vectors = output.pooler_output
                else:
                    mask = encoded["attention_mask"].unsqueeze(-1)
                    vectors = (output.last_hidden_state * mask).sum(1) / mask.sum(1)
                chunks.append(vectors.cpu().numpy())
        vectors = np.vstack(chunks) if chunks else np.zeros((0, self.dim))
        self.dim = int(vectors.shape[1]) if vectors.size else self.dim
        return vectors.astype(np.float64)

    def _load_reader(self):
        if self._reader is None:
            torch = self._torch()
            try:
                from transformers import DPRReader, DPRReaderTokenizer

                tokenizer = DPRReaderTokenizer.from_pretrained(self.reader_model_id)
                model = DPRReader.from_pretrained(self.reader_model_id)
            except Exception as exc:
                raise ModelNotLoaded(
                    f"cannot load reader model {self.reader_model_id}: {exc}"
                ) from exc
            model.eval()
            model.to(self.device)
            self._reader = (tokenizer, model, torch)
        return self._reader

    def extract(self, question: str, contexts: Sequence[str]) -> list[list[dict]]:
        tokenizer, model, torch = self._load_reader()
        spans: list[list[dict]] = []
        with self._lock, torch.no_grad():
            for context in contexts:
                encoded = tokenizer(
                    questions=[question],
                    texts=[context],
                    padding=True,
                    truncation=True,
                    max_length=256,
                    return_tensors="pt",
                ).to(self.device)
                outputs = model(**encoded)
                best = tokenizer.decode_best_spans(
                    encoded, outputs, num_spans=2, max_answer_length=10
                )
                spans.append(
                    [
                        {"text": span.text, "score": float(span.span_score)}
                        for span in best
                    ]
                )
        return spans
