"""Chunk vector store with metadata filtering, exact and HNSW search, and persistence.

Chunks live in per-``source_type`` collections. A search without a
source-type filter queries every collection and merges the per-collection
top-k. Results are ordered by score descending with ties broken by ascending
chunk id, so exact search is fully deterministic.

The on-disk layout written by :meth:`VectorStore.persist` is described in
``docs/index_format.md``.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import threading
from collections.abc import Iterable, Sequence
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from regionrag.corpus import Chunk, ChunkMetadata, Document, chunk_document, load_corpus
from regionrag.embed import EmbeddingProvider, EmbeddingVector
from regionrag.errors import (
    ChecksumError,
    DimensionMismatchError,
    IndexFormatError,
    IndexNotBuiltError,
    ProviderMismatchError,
    VersionError,
)
from regionrag.hnsw import HNSWGraph

DEFAULT_M = 16
DEFAULT_EF_CONSTRUCTION = 200
DEFAULT_EF_SEARCH = 128

FORMAT_MAGIC = b"RGRAGIX\x00"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class MetadataFilter:
    """Conjunctive chunk predicate; unset fields do not constrain.

    ``tags`` must all be present on the chunk; ``region_tags`` needs any one.
    """

    source_types: frozenset[str] | None = None
    min_year: int | None = None
    max_year: int | None = None
    tags: frozenset[str] | None = None
    region_tags: frozenset[str] | None = None

    def __post_init__(self):
        for name in ("source_types", "tags"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, frozenset(v))
        if self.region_tags is not None:
            object.__setattr__(self, "region_tags", frozenset(r.upper() for r in self.region_tags))

    @property
    def is_empty(self) -> bool:
        return all(
            v is None
            for v in (self.source_types, self.min_year, self.max_year, self.tags, self.region_tags)
        )

    def matches(self, meta: ChunkMetadata) -> bool:
        if self.source_types is not None and meta.source_type not in self.source_types:
            return False
        if self.min_year is not None and (meta.year is None or meta.year < self.min_year):
            return False
        if self.max_year is not None and (meta.year is None or meta.year > self.max_year):
            return False
        if self.tags is not None and not self.tags.issubset(meta.tags):
            return False
        if self.region_tags is not None and not (
            self.region_tags & {r.code for r in meta.region_tags}
        ):
            return False
        return True


@dataclass
class ScoredHit:
    chunk_id: str
    chunk: Chunk = field(repr=False)
    s_semantic: float
    s_distance: float | None = None
    s_final: float | None = None
    rank: int = 0


@dataclass(frozen=True)
class UpsertCounts:
    inserted: int = 0
    updated: int = 0


@dataclass(frozen=True)
class ReindexCounts:
    added: int = 0
    updated: int = 0
    removed: int = 0


class RWLock:
    """Many readers or one writer; writers wait for readers to drain."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False

    @contextmanager
    def read(self):
        with self._cond:
            while self._writer:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if self._readers == 0:
                    self._cond.notify_all()

    @contextmanager
    def write(self):
        with self._cond:
            while self._writer or self._readers:
                self._cond.wait()
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


class _Collection:
    def __init__(self, name: str, dim: int):
        self.name = name
        self.ids: list[str] = []
        self.pos: dict[str, int] = {}
        self.vectors = np.empty((0, dim), dtype=np.float64)
        self.graph: HNSWGraph | None = None

    def __len__(self):
        return len(self.ids)

    def set_rows(self, ids: list[str], vectors: np.ndarray) -> None:
        self.ids = ids
        self.pos = {cid: i for i, cid in enumerate(ids)}
        self.vectors = np.ascontiguousarray(vectors, dtype=np.float64)
        self.graph = None


def _top_rows(scores: np.ndarray, rows: np.ndarray, ids: list[str], k: int) -> list[tuple[float, str, int]]:
    """Top-k (score, id, row) among ``rows`` with id tie-breaking."""
    if rows.size > k:
        sub = scores[rows]
        kth = np.partition(sub, sub.size - k)[sub.size - k]
        rows = rows[sub >= kth]
    picked = sorted(((float(scores[r]), ids[r], int(r)) for r in rows), key=lambda t: (-t[0], t[1]))
    return picked[:k]


class VectorStore:
    """In-memory chunk index keyed by chunk id, partitioned by source type."""

    def __init__(self, dim: int, provider_id: str, ef_search: int = DEFAULT_EF_SEARCH):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.provider_id = provider_id
        self.ef_search = ef_search
        self.hnsw_params: dict | None = None
        self.doc_hashes: dict[str, str] = {}
        self.doc_chunks: dict[str, list[str]] = {}
        self._collections: dict[str, _Collection] = {}
        self._chunks: dict[str, Chunk] = {}
        self._where: dict[str, str] = {}
        self._lock = RWLock()

    # ------------------------------------------------------------------ basics

    def __len__(self) -> int:
        return len(self._chunks)

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._chunks

    @property
    def collections(self) -> dict[str, list[str]]:
        return {name: list(c.ids) for name, c in sorted(self._collections.items())}

    def chunk(self, chunk_id: str) -> Chunk:
        return self._chunks[chunk_id]

    def chunk_ids(self) -> list[str]:
        return sorted(self._chunks)

    def chunks(self) -> list[Chunk]:
        return [self._chunks[c] for c in self.chunk_ids()]

    def vector(self, chunk_id: str) -> np.ndarray:
        coll = self._collections[self._where[chunk_id]]
        return coll.vectors[coll.pos[chunk_id]].copy()

    @property
    def is_built(self) -> bool:
        return bool(self._collections) and all(c.graph is not None for c in self._collections.values())

    def check_provider(self, provider: EmbeddingProvider) -> None:
        if provider.provider_id != self.provider_id:
            raise ProviderMismatchError(
                f"store was built with {self.provider_id!r}, provider is {provider.provider_id!r}"
            )
        if provider.dim != self.dim:
            raise DimensionMismatchError(f"store dim {self.dim}, provider dim {provider.dim}")

    def _check_vector(self, vec: EmbeddingVector) -> None:
        if vec.dim != self.dim:
            raise DimensionMismatchError(f"vector dim {vec.dim} does not match store dim {self.dim}")
        if vec.provider_id != self.provider_id:
            raise ProviderMismatchError(
                f"vector from {vec.provider_id!r} cannot enter a {self.provider_id!r} store"
            )

    # ----------------------------------------------------------------- writing

    def upsert_chunks(self, items: Iterable[tuple[Chunk, EmbeddingVector]]) -> UpsertCounts:
        """Insert or replace chunks by id; identical re-inserts are no-ops."""
        items = list(items)
        for _, vec in items:
            self._check_vector(vec)
        with self._lock.write():
            inserted = updated = 0
            additions: dict[str, list[tuple[str, np.ndarray]]] = {}
            for chunk, vec in items:
                cid = chunk.chunk_id
                unit = _unit(vec.values)
                name = chunk.metadata.source_type
                if cid in self._chunks:
                    coll = self._collections[self._where[cid]]
                    row = coll.pos[cid]
                    if self._chunks[cid] == chunk and np.array_equal(coll.vectors[row], unit):
                        continue
                    updated += 1
                    if self._where[cid] == name:
                        coll.vectors[row] = unit
                        coll.graph = None
                        self._chunks[cid] = chunk
                        continue
                    self._drop(cid)
                else:
                    inserted += 1
                self._chunks[cid] = chunk
                self._where[cid] = name
                additions.setdefault(name, []).append((cid, unit))
            for name, rows in additions.items():
                coll = self._collections.setdefault(name, _Collection(name, self.dim))
                ids = coll.ids + [cid for cid, _ in rows]
                vecs = np.vstack([coll.vectors] + [u[None, :] for _, u in rows])
                coll.set_rows(ids, vecs)
            return UpsertCounts(inserted, updated)

    def _drop(self, cid: str) -> None:
        coll = self._collections[self._where.pop(cid)]
        row = coll.pos[cid]
        ids = coll.ids[:row] + coll.ids[row + 1 :]
        coll.set_rows(ids, np.delete(coll.vectors, row, axis=0))
        del self._chunks[cid]
        if not coll.ids:
            del self._collections[coll.name]

    def remove_chunks(self, chunk_ids: Iterable[str]) -> int:
        with self._lock.write():
            n = 0
            for cid in chunk_ids:
                if cid in self._chunks:
                    self._drop(cid)
                    n += 1
            return n

    def build_hnsw(
        self,
        m: int = DEFAULT_M,
        ef_construction: int = DEFAULT_EF_CONSTRUCTION,
        seed: int = 0,
        only_stale: bool = False,
    ) -> dict:
        """Build one HNSW graph per collection; returns node and layer counts."""
        if not self._chunks:
            raise ValueError("cannot build an index over an empty store")
        with self._lock.write():
            params = {"m": m, "ef_construction": ef_construction, "seed": seed}
            if params != self.hnsw_params:
                only_stale = False
            self.hnsw_params = params
            per = {}
            for name, coll in sorted(self._collections.items()):
                if not (only_stale and coll.graph is not None):
                    coll.graph = HNSWGraph.build(coll.vectors, m, ef_construction, seed)
                per[name] = coll.graph.stats()
            return {
                "nodes": sum(s["nodes"] for s in per.values()),
                "layers": max(s["layers"] for s in per.values()),
                "collections": per,
            }

    # ----------------------------------------------------------------- reading

    def _prepare_query(self, query_vec: EmbeddingVector | np.ndarray) -> np.ndarray:
        if isinstance(query_vec, EmbeddingVector):
            self._check_vector(query_vec)
            q = query_vec.values
        else:
            q = np.asarray(query_vec, dtype=np.float64)
            if q.shape != (self.dim,):
                raise DimensionMismatchError(f"query shape {q.shape}, store dim {self.dim}")
        return np.ascontiguousarray(_unit(q))

    def _targets(self, flt: MetadataFilter | None) -> list[tuple[_Collection, np.ndarray | None]]:
        out = []
        for name, coll in sorted(self._collections.items()):
            if flt is not None and flt.source_types is not None and name not in flt.source_types:
                continue
            mask = None
            if flt is not None and not flt.is_empty:
                mask = np.fromiter(
                    (flt.matches(self._chunks[cid].metadata) for cid in coll.ids),
                    dtype=np.bool_,
                    count=len(coll.ids),
                )
            out.append((coll, mask))
        return out

    def _hits(self, picked: list[tuple[float, str, int]], k: int) -> list[ScoredHit]:
        picked = sorted(picked, key=lambda t: (-t[0], t[1]))[:k]
        return [
            ScoredHit(cid, self._chunks[cid], score, rank=i + 1)
            for i, (score, cid, _) in enumerate(picked)
        ]

    def exact_search(
        self,
        query_vec: EmbeddingVector | np.ndarray,
        filter: MetadataFilter | None = None,
        k: int = 5,
    ) -> list[ScoredHit]:
        """Brute-force cosine top-k over chunks passing ``filter``."""
        if k < 1:
            raise ValueError("k must be at least 1")
        q = self._prepare_query(query_vec)
        with self._lock.read():
            picked = []
            for coll, mask in self._targets(filter):
                rows = np.arange(len(coll)) if mask is None else np.flatnonzero(mask)
                if rows.size == 0:
                    continue
                scores = coll.vectors @ q
                picked.extend(_top_rows(scores, rows, coll.ids, k))
            return self._hits(picked, k)

    def ann_search(
        self,
        query_vec: EmbeddingVector | np.ndarray,
        filter: MetadataFilter | None = None,
        k: int = 5,
        ef: int | None = None,
    ) -> list[ScoredHit]:
        """Approximate top-k through the HNSW graphs.

        Filtered rows are traversed but not returned. A filter that leaves
        fewer rows than the search beam, or a beam that comes back short, is
        answered by an exact scan of the admissible rows instead.
        """
        if k < 1:
            raise ValueError("k must be at least 1")
        q = self._prepare_query(query_vec)
        ef = max(ef or self.ef_search, k)
        with self._lock.read():
            targets = self._targets(filter)
            stale = [c.name for c, _ in targets if c.graph is None]
            if stale:
                raise IndexNotBuiltError(
                    f"HNSW graph missing or stale for collection(s) {stale}; call build_hnsw() first"
                )
            picked = []
            for coll, mask in targets:
                admissible = len(coll) if mask is None else int(mask.sum())
                if admissible == 0:
                    continue
                want = min(k, admissible)
                if mask is not None and admissible <= ef:
                    rows = np.flatnonzero(mask)
                else:
                    rows, _ = coll.graph.search(coll.vectors, q, k, ef, mask)
                    if rows.size < want:
                        rows = np.arange(len(coll)) if mask is None else np.flatnonzero(mask)
                scores = np.zeros(len(coll))
                scores[rows] = coll.vectors[rows] @ q
                picked.extend(_top_rows(scores, rows, coll.ids, k))
            return self._hits(picked, k)

    # ------------------------------------------------------------- corpus sync

    def sync_documents(
        self,
        docs: Sequence[Document],
        provider: EmbeddingProvider,
        chunk_size: int = 300,
        overlap: int = 50,
    ) -> ReindexCounts:
        """Bring the store in line with ``docs``, re-embedding only changed documents.

        Counts are in chunks: chunks of new documents, chunks rewritten for
        changed documents, and chunks dropped (stale or from deleted documents).
        """
        self.check_provider(provider)
        added = updated = removed = 0
        present = set()
        for doc in docs:
            present.add(doc.id)
            h = f"{doc.content_hash()}:{chunk_size}:{overlap}"
            if self.doc_hashes.get(doc.id) == h:
                continue
            chunks = chunk_document(doc, chunk_size, overlap)
            vecs = provider.embed_texts([c.text for c in chunks])
            self.upsert_chunks(zip(chunks, vecs))
            new_ids = [c.chunk_id for c in chunks]
            if doc.id in self.doc_hashes:
                stale = set(self.doc_chunks.get(doc.id, ())) - set(new_ids)
                removed += self.remove_chunks(sorted(stale))
                updated += len(chunks)
            else:
                added += len(chunks)
            self.doc_hashes[doc.id] = h
            self.doc_chunks[doc.id] = new_ids
        for doc_id in sorted(set(self.doc_hashes) - present):
            removed += self.remove_chunks(self.doc_chunks.pop(doc_id, ()))
            del self.doc_hashes[doc_id]
        if (added or updated or removed) and self.hnsw_params is not None and self._chunks:
            self.build_hnsw(**self.hnsw_params, only_stale=True)
        return ReindexCounts(added, updated, removed)

    def reindex_changed(
        self,
        corpus_path: str | Path,
        provider: EmbeddingProvider,
        chunk_size: int = 300,
        overlap: int = 50,
    ) -> ReindexCounts:
        return self.sync_documents(load_corpus(corpus_path), provider, chunk_size, overlap)

    # ------------------------------------------------------------- persistence

    def persist(self, path: str | Path) -> None:
        with self._lock.read():
            arrays: list[np.ndarray] = []
            colls = []
            for name, coll in sorted(self._collections.items()):
                entry = {"name": name, "ids": coll.ids, "graph": None}
                arrays.append(coll.vectors.astype("<f8"))
                if coll.graph is not None:
                    g = coll.graph
                    entry["graph"] = {
                        "entry": g.entry,
                        "m": g.m,
                        "ef_construction": g.ef_construction,
                        "seed": g.seed,
                        "keep_pruned": g.keep_pruned,
                        "layers": g.n_layers,
                    }
                    arrays += [g.levels.astype("<i8"), g.adj.astype("<i4"), g.cnt.astype("<i4")]
                colls.append(entry)
            meta = {
                "ef_search": self.ef_search,
                "hnsw_params": self.hnsw_params,
                "doc_hashes": self.doc_hashes,
                "doc_chunks": self.doc_chunks,
                "collections": colls,
                "chunks": [self._chunks[c].to_dict() for c in sorted(self._chunks)],
            }
            meta_bytes = json.dumps(meta, ensure_ascii=False).encode("utf-8")
            payload = b"".join(
                [struct.pack("<Q", len(meta_bytes)), meta_bytes] + [a.tobytes() for a in arrays]
            )
            pid = self.provider_id.encode("utf-8")
            header = (
                FORMAT_MAGIC
                + struct.pack("<HIH", FORMAT_VERSION, self.dim, len(pid))
                + pid
                + struct.pack("<QQ", len(self._chunks), len(payload))
                + hashlib.sha256(payload).digest()
            )
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str | Path) -> VectorStore:
        raw = Path(path).read_bytes()
        if len(raw) < len(FORMAT_MAGIC) or raw[: len(FORMAT_MAGIC)] != FORMAT_MAGIC:
            if FORMAT_MAGIC.startswith(raw):
                raise ChecksumError(f"{path}: truncated header")
            raise IndexFormatError(f"{path}: not an index file")
        off = len(FORMAT_MAGIC)
        try:
            version, dim, pid_len = struct.unpack_from("<HIH", raw, off)
            if version > FORMAT_VERSION:
                raise VersionError(
                    f"{path}: format version {version} is newer than supported {FORMAT_VERSION}"
                )
            if version < 1:
                raise VersionError(f"{path}: unknown format version {version}")
            off += struct.calcsize("<HIH")
            provider_id = raw[off : off + pid_len].decode("utf-8")
            off += pid_len
            count, payload_len = struct.unpack_from("<QQ", raw, off)
            off += 16
            digest = raw[off : off + 32]
            off += 32
        except struct.error as exc:
            raise ChecksumError(f"{path}: truncated header") from exc
        payload = raw[off:]
        if len(digest) != 32 or len(payload) != payload_len or hashlib.sha256(payload).digest() != digest:
            raise ChecksumError(f"{path}: checksum mismatch (file truncated or corrupted)")

        (meta_len,) = struct.unpack_from("<Q", payload, 0)
        meta = json.loads(payload[8 : 8 + meta_len].decode("utf-8"))
        cursor = 8 + meta_len

        def take(dtype: str, shape: tuple[int, ...]) -> np.ndarray:
            nonlocal cursor
            n = int(np.prod(shape)) * np.dtype(dtype).itemsize
            arr = np.frombuffer(payload, dtype=dtype, count=int(np.prod(shape)), offset=cursor)
            cursor += n
            return arr.reshape(shape).copy()

        store = cls(dim, provider_id, ef_search=meta["ef_search"])
        store.hnsw_params = meta["hnsw_params"]
        store.doc_hashes = dict(meta["doc_hashes"])
        store.doc_chunks = {k: list(v) for k, v in meta["doc_chunks"].items()}
        for d in meta["chunks"]:
            chunk = Chunk.from_dict(d)
            store._chunks[chunk.chunk_id] = chunk
        for entry in meta["collections"]:
            coll = _Collection(entry["name"], dim)
            ids = list(entry["ids"])
            coll.set_rows(ids, take("<f8", (len(ids), dim)).astype(np.float64))
            g = entry["graph"]
            if g is not None:
                levels = take("<i8", (len(ids),)).astype(np.int64)
                adj = take("<i4", (g["layers"], len(ids), 2 * g["m"])).astype(np.int32)
                cnt = take("<i4", (g["layers"], len(ids))).astype(np.int32)
                coll.graph = HNSWGraph(
                    adj, cnt, levels, g["entry"], g["m"], g["ef_construction"], g["seed"],
                    g["keep_pruned"],
                )
            store._collections[coll.name] = coll
            for cid in ids:
                store._where[cid] = coll.name
        if len(store._chunks) != count or cursor != len(payload):
            raise IndexFormatError(f"{path}: inconsistent record count")
        return store
