"""Embedding-based metrics and the four RAGAS sub-metrics."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Protocol

import numpy as np

from regionrag.answer import Completion, GenerationConfig, Passage, PromptBundle, strip_citations
from regionrag.embed import EmbeddingProvider, hash_vector
from regionrag.textnorm import normalized_tokens, split_sentences

DEFAULT_TAU = 0.7


class SentenceEncoder(Protocol):
    def encode(self, texts: Sequence[str]) -> np.ndarray: ...


class HashEncoder:
    """Feature-hashing encoder without the retrieval prefix."""

    def __init__(self, dim: int = 512):
        self.dim = dim

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim))
        return np.stack([hash_vector(t, self.dim) for t in texts])


class ProviderEncoder:
    """Adapts an :class:`EmbeddingProvider` (prefix included) to the encoder interface."""

    def __init__(self, provider: EmbeddingProvider):
        self.provider = provider

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.provider.dim))
        return np.stack([v.values for v in self.provider.embed_texts(list(texts))])


def unit_rows(m: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(m, axis=1, keepdims=True)
    return np.divide(m, n, out=np.zeros_like(m), where=n > 0)


def bertscore_f1(pred: str, ref: str, encoder: SentenceEncoder) -> float:
    """Greedy token matching F1 in embedding space.

    Each prediction token is matched to its most similar reference token
    (precision) and vice versa (recall); the result is clamped to [0, 1].
    """
    p = normalized_tokens(pred)
    r = normalized_tokens(ref)
    if not p or not r:
        return 0.0
    vocab = sorted(set(p) | set(r))
    emb = unit_rows(encoder.encode(vocab))
    row = {t: i for i, t in enumerate(vocab)}
    sim = emb[[row[t] for t in p]] @ emb[[row[t] for t in r]].T
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    if precision + recall <= 0:
        return 0.0
    f = 2 * precision * recall / (precision + recall)
    return min(1.0, max(0.0, f))


def context_precision(retrieved: Sequence[str], relevant: Sequence[str]) -> float | None:
    """Share of retrieved passages that are relevant; ``None`` when nothing was retrieved."""
    ret = set(retrieved)
    if not ret:
        return None
    return len(ret & set(relevant)) / len(ret)


def context_recall(retrieved: Sequence[str], relevant: Sequence[str]) -> float | None:
    """Share of gold passages that were retrieved; ``None`` without gold."""
    rel = set(relevant)
    if not rel:
        return None
    return len(rel & set(retrieved)) / len(rel)


class EmbeddingJudge:
    """A claim is supported when some evidence sentence has cosine >= ``tau`` with it."""

    def __init__(self, encoder: SentenceEncoder, tau: float = DEFAULT_TAU):
        self.encoder = encoder
        self.tau = tau

    def supported(self, claims: list[str], evidence: list[str]) -> list[bool]:
        if not evidence:
            return [False] * len(claims)
        c = unit_rows(self.encoder.encode(claims))
        e = unit_rows(self.encoder.encode(evidence))
        best = (c @ e.T).max(axis=1)
        # tolerance keeps verbatim copies at exactly tau from flickering
        return [bool(b >= self.tau - 1e-12) for b in best]


class LLMJudge:
    """Asks a chat model whether each claim follows from the evidence."""

    SYSTEM = (
        "You verify factual claims against evidence passages. "
        "Reply with exactly 'yes' if the claim is directly supported by the passages, otherwise 'no'."
    )

    def __init__(self, client, cfg: GenerationConfig = GenerationConfig(temperature=0.0)):
        self.client = client
        self.cfg = cfg

    def supported(self, claims: list[str], evidence: list[str]) -> list[bool]:
        passages = tuple(
            Passage(i, f"evidence-{i}", "", {"source_type": "evidence"}, t)
            for i, t in enumerate(evidence, start=1)
        )
        out = []
        for claim in claims:
            bundle = PromptBundle(self.SYSTEM, f"Claim: {claim}", passages)
            reply: Completion = self.client.complete(bundle, self.cfg)
            out.append(reply.text.strip().lower().startswith("yes"))
        return out


def faithfulness(answer: str, retrieved_texts: Sequence[str], judge) -> float | None:
    """Fraction of answer sentences the judge deems supported; ``None`` without claims."""
    claims = split_sentences(strip_citations(answer))
    if not claims:
        return None
    evidence = [s for t in retrieved_texts for s in split_sentences(t)]
    verdicts = judge.supported(claims, evidence)
    return sum(verdicts) / len(claims)


def answer_relevance(question: str, answer: str, encoder: SentenceEncoder) -> float:
    if not question.strip() or not answer.strip():
        return 0.0
    v = unit_rows(encoder.encode([question, strip_citations(answer)]))
    return min(1.0, max(0.0, float(v[0] @ v[1])))


def ragas_score(
    p_c: float | None, r_c: float | None, f: float | None, r_a: float | None
) -> float | None:
    """Unweighted mean of the four sub-scores; ``None`` if any is undefined."""
    parts = (p_c, r_c, f, r_a)
    if any(x is None for x in parts):
        return None
    return sum(parts) / 4.0
