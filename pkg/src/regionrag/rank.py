"""Locality-weighted fusion of semantic and distance scores, and re-ranking."""

from __future__ import annotations

from dataclasses import dataclass, replace

from regionrag.embed import EmbeddingProvider
from regionrag.geo import (
    DEFAULT_MAX_DISTANCE_KM,
    DEFAULT_SCALE_KM,
    UserLocation,
    normalize_distance,
    s_distance,
    user_doc_distance,
)
from regionrag.index import MetadataFilter, ScoredHit, VectorStore


@dataclass(frozen=True)
class FusionConfig:
    alpha: float = 0.5
    top_k: int = 5
    expansion_factor: int = 4
    distance_scale_km: float = DEFAULT_SCALE_KM
    max_distance_km: float = DEFAULT_MAX_DISTANCE_KM

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.top_k < 1:
            raise ValueError("top_k must be at least 1")
        if self.expansion_factor < 1:
            raise ValueError("expansion_factor must be at least 1")
        if self.distance_scale_km <= 0:
            raise ValueError("distance_scale_km must be positive")


def fuse_score(s_semantic: float, s_dist: float, alpha: float) -> float:
    """``(1 - alpha) * s_semantic + alpha * s_dist``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return (1.0 - alpha) * s_semantic + alpha * s_dist


def rerank(candidates: list[ScoredHit], user: UserLocation, cfg: FusionConfig) -> list[ScoredHit]:
    """Fill distance and fused scores, sort by the fused score and keep ``top_k``.

    Negative cosine similarities are clamped to 0 before fusion. Ties on the
    fused score go to the smaller chunk id. Input hits are not modified.
    """
    scored = []
    for hit in candidates:
        km = user_doc_distance(user, hit.chunk.metadata, cfg.max_distance_km)
        s_dist = s_distance(normalize_distance(km, cfg.distance_scale_km))
        s_final = fuse_score(max(hit.s_semantic, 0.0), s_dist, cfg.alpha)
        scored.append(replace(hit, s_distance=s_dist, s_final=s_final))
    scored.sort(key=lambda h: (-h.s_final, h.chunk_id))
    out = scored[: cfg.top_k]
    for i, h in enumerate(out):
        h.rank = i + 1
    return out


def retrieve(
    store: VectorStore,
    query: str,
    user: UserLocation,
    provider: EmbeddingProvider,
    cfg: FusionConfig = FusionConfig(),
    filter: MetadataFilter | None = None,
    use_ann: bool | None = None,
) -> list[ScoredHit]:
    """Embed ``query``, pull ``top_k * expansion_factor`` semantic candidates, fuse, truncate.

    ``use_ann=None`` searches the HNSW graphs when they are built and falls
    back to an exact scan otherwise.
    """
    store.check_provider(provider)
    if len(store) == 0:
        return []
    qvec = provider.embed_text(query)
    pool = cfg.top_k * cfg.expansion_factor
    if use_ann is None:
        use_ann = store.is_built
    search = store.ann_search if use_ann else store.exact_search
    candidates = search(qvec, filter, pool)
    return rerank(candidates, user, cfg)
