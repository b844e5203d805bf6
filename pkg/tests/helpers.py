"""Builders for synthetic stores shared by several test modules."""

from __future__ import annotations

import numpy as np

from regionrag.corpus import SOURCE_TYPES, Chunk, ChunkMetadata
from regionrag.embed import EmbeddingVector
from regionrag.geo import GeoPoint, RegionTag
from regionrag.index import VectorStore

PID = "test-vec"
REGION_CODES = ("US-NC", "US-VA", "US-CA", "US-TX")


def make_chunk(cid: str, rng: np.random.Generator, source_type: str | None = None) -> Chunk:
    st = source_type or SOURCE_TYPES[int(rng.integers(len(SOURCE_TYPES)))]
    year = int(rng.integers(2000, 2025))
    regions = (RegionTag(REGION_CODES[int(rng.integers(len(REGION_CODES)))]),) if rng.random() < 0.7 else ()
    centroid = GeoPoint(float(rng.uniform(25, 49)), float(rng.uniform(-124, -67))) if rng.random() < 0.8 else None
    tags = tuple(t for t in ("soil", "pest", "water") if rng.random() < 0.4)
    meta = ChunkMetadata(cid.split("#")[0], st, year, regions, centroid, tags, "", f"title {cid}")
    return Chunk(cid, meta.document_id, f"chunk {cid}", (0, 1), "", meta)


def random_store(n: int, dim: int = 16, seed: int = 0, source_type: str | None = None):
    """A store of ``n`` random chunks plus the raw (unnormalized) vectors by id."""
    rng = np.random.default_rng(seed)
    store = VectorStore(dim, PID)
    vecs = {}
    items = []
    for i in range(n):
        cid = f"doc{i:05d}#0"
        v = rng.normal(size=dim)
        vecs[cid] = v
        items.append((make_chunk(cid, rng, source_type), EmbeddingVector(v, PID)))
    store.upsert_chunks(items)
    return store, vecs


def brute_force(vecs: dict, q: np.ndarray, k: int, keep=lambda cid: True) -> list[tuple[str, float]]:
    qn = q / np.linalg.norm(q)
    scored = [(cid, float(v @ qn / np.linalg.norm(v))) for cid, v in vecs.items() if keep(cid)]
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]
