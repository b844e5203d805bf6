"""Application configuration: one JSON document, every field defaulted.

Secrets never live in the file; providers name the environment variable that
holds the API key.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from regionrag.answer import ChatCompletionClient, GenerationConfig, OfflineStubClient
from regionrag.corpus import DEFAULT_CHUNK_SIZE, DEFAULT_OVERLAP
from regionrag.embed import REMOTE_DIM, EmbeddingProvider, HashEmbeddingProvider, RemoteEmbeddingProvider
from regionrag.evalkit.semantic import DEFAULT_TAU
from regionrag.index import DEFAULT_EF_CONSTRUCTION, DEFAULT_EF_SEARCH, DEFAULT_M
from regionrag.rank import FusionConfig

HASH_DIM = 512


@dataclass(frozen=True)
class ProviderSettings:
    kind: str = "deterministic_hash"  # or remote_http
    dim: int | None = None  # None: 512 for hashing, 1536 for remote
    base_url: str | None = None
    model: str = "text-embedding-ada-002"
    api_key_env: str = "OPENAI_API_KEY"
    batch_size: int = 64
    max_parallel: int = 4

    @property
    def resolved_dim(self) -> int:
        if self.dim is not None:
            return self.dim
        return REMOTE_DIM if self.kind == "remote_http" else HASH_DIM

    def build(self, max_parallel: int | None = None) -> EmbeddingProvider:
        if self.kind == "deterministic_hash":
            return HashEmbeddingProvider(self.resolved_dim)
        if self.kind == "remote_http":
            if not self.base_url:
                raise ValueError("provider.base_url is required for remote_http embeddings")
            return RemoteEmbeddingProvider(
                self.base_url,
                model=self.model,
                dim=self.resolved_dim,
                api_key_env=self.api_key_env,
                batch_size=self.batch_size,
                max_parallel=max_parallel or self.max_parallel,
            )
        raise ValueError(f"unknown provider kind {self.kind!r}")


@dataclass(frozen=True)
class ChatSettings:
    base_url: str | None = None
    api_key_env: str = "OPENAI_API_KEY"
    timeout: float = 120.0

    def build(self, offline: bool):
        if offline:
            return OfflineStubClient()
        if not self.base_url:
            raise ValueError("chat.base_url is not configured; pass --offline or set it in the config")
        return ChatCompletionClient(self.base_url, self.api_key_env, self.timeout)


@dataclass(frozen=True)
class ChunkSettings:
    chunk_size: int = DEFAULT_CHUNK_SIZE
    overlap: int = DEFAULT_OVERLAP


@dataclass(frozen=True)
class IndexSettings:
    m: int = DEFAULT_M
    ef_construction: int = DEFAULT_EF_CONSTRUCTION
    ef_search: int = DEFAULT_EF_SEARCH
    seed: int = 0


@dataclass(frozen=True)
class EvalSettings:
    seeds: tuple[int, ...] = (1, 2, 3)
    resamples: int = 10_000
    tau: float = DEFAULT_TAU
    encoder_dim: int = HASH_DIM


@dataclass(frozen=True)
class AppConfig:
    corpus_path: str = "corpus.jsonl"
    index_path: str = "index.rgx"
    provider: ProviderSettings = field(default_factory=ProviderSettings)
    chat: ChatSettings = field(default_factory=ChatSettings)
    chunking: ChunkSettings = field(default_factory=ChunkSettings)
    index: IndexSettings = field(default_factory=IndexSettings)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    eval: EvalSettings = field(default_factory=EvalSettings)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ValueError(f"{where}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ValueError(f"{where}: unknown key(s) {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        default = fields[name].default_factory() if fields[name].default_factory is not dataclasses.MISSING else None
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, f"{where}.{name}")
        elif isinstance(value, list):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    return cls(**kwargs)


def config_from_dict(data: dict) -> AppConfig:
    return _build(AppConfig, data, "config")


def load_config(path: str | Path | None) -> AppConfig:
    if path is None:
        return AppConfig()
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))
