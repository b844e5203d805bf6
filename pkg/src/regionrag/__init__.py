"""Region-aware retrieval-augmented answering with an evaluation harness."""

from regionrag.answer import (
    AnswerRecord,
    GenerationConfig,
    OfflineStubClient,
    PromptBundle,
    assemble_prompt,
    generate,
)
from regionrag.config import AppConfig, load_config
from regionrag.corpus import Chunk, ChunkMetadata, Document, chunk_corpus, chunk_document, load_corpus
from regionrag.embed import EmbeddingVector, HashEmbeddingProvider, RemoteEmbeddingProvider, cosine
from regionrag.errors import RegionRagError
from regionrag.geo import GeoPoint, RegionTag, UserLocation, haversine_km, normalize_distance, s_distance
from regionrag.index import MetadataFilter, ScoredHit, VectorStore
from regionrag.rank import FusionConfig, fuse_score, rerank, retrieve

__version__ = "0.1.0"

__all__ = [
    "AnswerRecord",
    "AppConfig",
    "Chunk",
    "ChunkMetadata",
    "Document",
    "EmbeddingVector",
    "FusionConfig",
    "GenerationConfig",
    "GeoPoint",
    "HashEmbeddingProvider",
    "MetadataFilter",
    "OfflineStubClient",
    "PromptBundle",
    "RegionRagError",
    "RegionTag",
    "RemoteEmbeddingProvider",
    "ScoredHit",
    "UserLocation",
    "VectorStore",
    "assemble_prompt",
    "chunk_corpus",
    "chunk_document",
    "cosine",
    "fuse_score",
    "generate",
    "haversine_km",
    "load_config",
    "load_corpus",
    "normalize_distance",
    "rerank",
    "retrieve",
    "s_distance",
]
