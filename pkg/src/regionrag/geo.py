"""Geodesic distance between users and documents, and the distance-decay score."""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from regionrag.corpus import ChunkMetadata

EARTH_RADIUS_KM = 6371.0
DEFAULT_SCALE_KM = 1000.0
# Half the great-circle circumference, rounded: the farthest two points can be.
DEFAULT_MAX_DISTANCE_KM = 20015.0


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range: {self.lat}")
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range: {self.lon}")

    @classmethod
    def from_dict(cls, d: dict) -> GeoPoint:
        return cls(float(d["lat"]), float(d["lon"]))

    def to_dict(self) -> dict:
        return {"lat": self.lat, "lon": self.lon}


@dataclass(frozen=True)
class RegionTag:
    """An administrative region code such as ``US-NC``; codes compare case-insensitively."""

    code: str
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        code = self.code.strip().upper()
        if not code:
            raise ValueError("region code must be non-empty")
        object.__setattr__(self, "code", code)

    def __str__(self) -> str:
        return self.code


def as_region_tags(tags: Iterable[str | RegionTag]) -> tuple[RegionTag, ...]:
    return tuple(t if isinstance(t, RegionTag) else RegionTag(t) for t in tags)


@dataclass(frozen=True)
class UserLocation:
    """Where the asker is: an optional point plus the regions they belong to."""

    point: GeoPoint | None = None
    regions: tuple[RegionTag, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "regions", as_region_tags(self.regions))


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance on a sphere of radius 6371 km."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    h = min(1.0, max(0.0, h))
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


def user_doc_distance(
    user: UserLocation,
    doc_meta: ChunkMetadata,
    max_distance_km: float = DEFAULT_MAX_DISTANCE_KM,
) -> float:
    """Distance in km between a user and a document's target region.

    A shared region tag means the user is inside the document's region and the
    distance is 0. Otherwise the great-circle distance to the document centroid
    is used; when either side has no point, ``max_distance_km`` is returned so
    the document is penalized but still retrievable.
    """
    if user.regions and doc_meta.region_tags:
        if {r.code for r in user.regions} & {r.code for r in doc_meta.region_tags}:
            return 0.0
    if user.point is None or doc_meta.centroid is None:
        return max_distance_km
    return haversine_km(user.point, doc_meta.centroid)


def normalize_distance(km: float, scale_km: float = DEFAULT_SCALE_KM) -> float:
    if scale_km <= 0:
        raise ValueError(f"scale_km must be positive, got {scale_km}")
    if km < 0:
        raise ValueError(f"distance must be non-negative, got {km}")
    return km / scale_km


def s_distance(d: float) -> float:
    """Distance-decay score ``1 / (1 + d)``; equals 1 at d = 0 and stays positive."""
    if d < 0:
        raise ValueError(f"normalized distance must be non-negative, got {d}")
    return 1.0 / (1.0 + d)
