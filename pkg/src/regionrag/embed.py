"""Dense embeddings: an offline feature-hashing embedder and a remote HTTP client.

Every string a provider embeds is first whitespace-collapsed and prefixed with
``"text: "``. Providers keep a bounded log of the exact strings they embedded.
"""

from __future__ import annotations

import hashlib
from collections import deque
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import httpx
import numpy as np

from regionrag.errors import DimensionMismatchError, TransportError
from regionrag.http import post_json
from regionrag.textnorm import word_tokens

EMBED_PREFIX = "text: "
REMOTE_DIM = 1536


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    values: np.ndarray
    provider_id: str

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).ravel()
        if v.size == 0:
            raise ValueError("embedding must have at least one dimension")
        if not np.all(np.isfinite(v)):
            raise ValueError("embedding contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    @property
    def is_degenerate(self) -> bool:
        return self.norm == 0.0

    def unit(self) -> np.ndarray:
        n = self.norm
        return self.values / n if n > 0 else self.values.copy()

    def __eq__(self, other):
        if not isinstance(other, EmbeddingVector):
            return NotImplemented
        return self.provider_id == other.provider_id and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.provider_id, self.values.tobytes()))


def cosine(a: EmbeddingVector | np.ndarray, b: EmbeddingVector | np.ndarray) -> float:
    """Cosine similarity; 0 when either vector has zero norm."""
    va = a.values if isinstance(a, EmbeddingVector) else np.asarray(a, dtype=np.float64)
    vb = b.values if isinstance(b, EmbeddingVector) else np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise DimensionMismatchError(f"cannot compare dims {va.shape} and {vb.shape}")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        return 0.0
    c = float(np.dot(va, vb) / (na * nb))
    return min(1.0, max(-1.0, c))


@lru_cache(maxsize=1 << 18)
def _feature_hash(feature: str) -> int:
    return int.from_bytes(hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest(), "little")


def hash_vector(text: str, dim: int) -> np.ndarray:
    """Signed feature hashing of word unigrams and bigrams, L2-normalized.

    Empty or token-free text gives the zero vector.
    """
    if dim < 8:
        raise ValueError(f"dim must be at least 8, got {dim}")
    toks = word_tokens(text)
    feats = toks + [f"{a} {b}" for a, b in zip(toks, toks[1:])]
    v = np.zeros(dim, dtype=np.float64)
    for f in feats:
        h = _feature_hash(f)
        v[h % dim] += 1.0 if (h >> 63) & 1 else -1.0
    n = np.linalg.norm(v)
    if n > 0:
        v /= n
    return v


def hash_embed(text: str, dim: int) -> EmbeddingVector:
    return EmbeddingVector(hash_vector(text, dim), provider_id=f"hash-{dim}")


def prepare_text(text: str) -> str:
    """The exact string sent to the embedding model for ``text``."""
    body = " ".join(text.split())
    if not body:
        raise ValueError("cannot embed empty text")
    return EMBED_PREFIX + body


class EmbeddingProvider:
    """Base class: subclasses implement ``_embed_prepared`` on prefixed strings."""

    kind: str = ""

    def __init__(self, provider_id: str, dim: int, log_size: int = 10_000):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.provider_id = provider_id
        self.dim = dim
        self.log: deque[str] = deque(maxlen=log_size)

    def _embed_prepared(self, texts: list[str]) -> np.ndarray:
        raise NotImplementedError

    def embed_texts(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        prepared = [prepare_text(t) for t in texts]
        if not prepared:
            return []
        mat = self._embed_prepared(prepared)
        if mat.shape != (len(prepared), self.dim):
            raise DimensionMismatchError(
                f"{self.provider_id}: expected {(len(prepared), self.dim)}, got {mat.shape}"
            )
        self.log.extend(prepared)
        return [EmbeddingVector(row, self.provider_id) for row in mat]

    def embed_text(self, text: str) -> EmbeddingVector:
        return self.embed_texts([text])[0]

    def describe(self) -> dict:
        return {"provider_id": self.provider_id, "dim": self.dim, "kind": self.kind}


class HashEmbeddingProvider(EmbeddingProvider):
    """Deterministic offline embedder; cosine tracks lexical overlap."""

    kind = "deterministic_hash"

    def __init__(self, dim: int = 512, provider_id: str | None = None):
        super().__init__(provider_id or f"hash-{dim}", dim)

    def _embed_prepared(self, texts: list[str]) -> np.ndarray:
        return np.stack([hash_vector(t, self.dim) for t in texts])


class RemoteEmbeddingProvider(EmbeddingProvider):
    """Client for an OpenAI-compatible ``/embeddings`` endpoint.

    Inputs are sent in batches of ``batch_size`` with at most ``max_parallel``
    requests in flight. Rows are placed by the response ``index`` field, so
    arrival order does not matter.
    """

    kind = "remote_http"

    def __init__(
        self,
        base_url: str,
        model: str = "text-embedding-ada-002",
        dim: int = REMOTE_DIM,
        api_key_env: str | None = "OPENAI_API_KEY",
        batch_size: int = 64,
        max_parallel: int = 4,
        timeout: float = 60.0,
        client: httpx.Client | None = None,
        provider_id: str | None = None,
    ):
        super().__init__(provider_id or f"remote:{model}", dim)
        if batch_size < 1 or max_parallel < 1:
            raise ValueError("batch_size and max_parallel must be positive")
        self.url = base_url.rstrip("/") + "/embeddings"
        self.model = model
        self.api_key_env = api_key_env
        self.batch_size = batch_size
        self.max_parallel = max_parallel
        self.timeout = timeout
        self.client = client or httpx.Client()

    def _embed_batch(self, batch: list[str]) -> np.ndarray:
        body = post_json(
            self.client,
            self.url,
            {"model": self.model, "input": batch},
            api_key_env=self.api_key_env,
            timeout=self.timeout,
        )
        try:
            data = body["data"]
        except (KeyError, TypeError) as exc:
            raise TransportError("embedding response lacks 'data'", retryable=False) from exc
        if len(data) != len(batch):
            raise TransportError(
                f"embedding response has {len(data)} rows for {len(batch)} inputs",
                retryable=False,
            )
        out = np.empty((len(batch), self.dim), dtype=np.float64)
        filled = set()
        for pos, item in enumerate(data):
            idx = item.get("index", pos)
            vec = item["embedding"]
            if len(vec) != self.dim:
                raise DimensionMismatchError(
                    f"{self.provider_id}: remote returned dim {len(vec)}, expected {self.dim}"
                )
            out[idx] = vec
            filled.add(idx)
        if len(filled) != len(batch):
            raise TransportError("embedding response has duplicate indices", retryable=False)
        return out

    def _embed_prepared(self, texts: list[str]) -> np.ndarray:
        batches = [texts[i : i + self.batch_size] for i in range(0, len(texts), self.batch_size)]
        if len(batches) == 1 or self.max_parallel == 1:
            parts = [self._embed_batch(b) for b in batches]
        else:
            with ThreadPoolExecutor(max_workers=self.max_parallel) as pool:
                parts = list(pool.map(self._embed_batch, batches))
        return np.concatenate(parts, axis=0)
