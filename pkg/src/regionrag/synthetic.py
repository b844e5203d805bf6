"""Synthetic corpora and planted-answer benchmarks for offline runs.

The planted benchmark has one topic per (crop, practice) pair. Every topic
has a near-duplicate advisory document in each of several regions, each
stating a different region-specific value. A question is asked from one
home region, and its answer appears verbatim only in that region's document.
Retrieval that ignores location sees the duplicates as equally relevant.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from regionrag.corpus import Document
from regionrag.evalkit.benchmark import EvalQuestion
from regionrag.geo import GeoPoint


@dataclass(frozen=True)
class Region:
    code: str
    name: str
    centroid: GeoPoint


REGIONS = {
    r.code: r
    for r in (
        Region("US-NC", "North Carolina", GeoPoint(35.5557, -79.3877)),
        Region("US-VA", "Virginia", GeoPoint(37.5215, -78.8537)),
        Region("US-SC", "South Carolina", GeoPoint(33.8361, -81.1637)),
        Region("US-GA", "Georgia", GeoPoint(32.6782, -83.2230)),
        Region("US-TX", "Texas", GeoPoint(31.1060, -97.6475)),
        Region("US-IA", "Iowa", GeoPoint(42.0751, -93.4960)),
        Region("US-CA", "California", GeoPoint(36.7783, -119.4179)),
        Region("US-WA", "Washington", GeoPoint(47.3826, -120.4472)),
    )
}
HOME_REGIONS = ("US-NC", "US-CA")

CROPS = (
    "corn", "soybean", "peanut", "tobacco", "cotton",
    "wheat", "sorghum", "strawberry", "blueberry", "tomato",
)

# (practice slug, subdomain, heading word, question, planted sentence, unit values)
PRACTICES = (
    (
        "nitrogen", "Soil", "Nitrogen Rate",
        "How many pounds of nitrogen per acre should be applied to {crop}?",
        "Apply {v} pounds of nitrogen per acre to {crop} grown in {region}.",
        (60, 80, 100, 120, 140, 160, 180, 200),
    ),
    (
        "planting", "Agronomy", "Planting Window",
        "At what soil temperature should {crop} be planted for best stand establishment?",
        "In {region}, {crop} should be planted once soil temperature reaches {v} degrees.",
        (50, 52, 54, 55, 58, 60, 62, 65),
    ),
    (
        "irrigation", "Irrigation", "Irrigation Scheduling",
        "How often should {crop} fields be irrigated during peak water demand?",
        "Irrigate {crop} fields in {region} every {v} days during peak water demand.",
        (3, 4, 5, 6, 7, 8, 9, 10),
    ),
    (
        "fungicide", "Pathology", "Leaf Spot Fungicide Timing",
        "At what interval should fungicide sprays for leaf spot on {crop} be repeated?",
        "Repeat leaf spot fungicide sprays on {crop} in {region} at {v} day intervals.",
        (7, 10, 12, 14, 16, 18, 21, 24),
    ),
    (
        "weeds", "Weeds", "Weed Control",
        "How many weeks after emergence must {crop} stay free of weed competition?",
        "Keep {crop} in {region} free of weed competition for {v} weeks after emergence.",
        (2, 3, 4, 5, 6, 7, 8, 9),
    ),
)

_FILLER = (
    "Scout fields regularly and keep records of every observation.",
    "Soil testing every two to three years guides lime and fertilizer decisions.",
    "Consult your county extension agent for field specific recommendations.",
    "Rotating crops helps break pest and disease cycles.",
    "Calibrate sprayers before each season to ensure accurate application.",
    "Residue management affects soil moisture and early season growth.",
    "Weather conditions during the season can shift optimal practices.",
    "Follow all label directions when handling crop protection products.",
    "Cover crops protect soil from erosion during winter months.",
    "Market prices and input costs influence the most profitable choice.",
)


def _topic_doc(crop: str, practice: tuple, region: Region, value: int, rng: random.Random, year: int) -> tuple[Document, str]:
    slug, subdomain, heading, _, sentence, _ = practice
    planted = sentence.format(crop=crop, region=region.name, v=value)
    filler = rng.sample(_FILLER, 2)
    text = "\n".join([f"# {crop.title()} {heading}", filler[0], planted, filler[1]])
    doc = Document(
        id=f"{slug}-{crop}-{region.code.lower()}",
        title=f"{crop.title()} {heading} in {region.name}",
        text=text,
        source_type="extension",
        year=year,
        region_tags=(region.code,),
        centroid=region.centroid,
        tags=(crop, slug),
    )
    return doc, planted


def background_documents(n: int = 4, seed: int = 0, words: int = 700) -> list[Document]:
    """Long region-less textbook documents; they span several chunks each."""
    rng = random.Random(seed)
    docs = []
    for i in range(n):
        body = []
        while sum(len(s.split()) for s in body) < words:
            body.append(rng.choice(_FILLER))
        text = f"# General Principles {i + 1}\n" + " ".join(body)
        docs.append(
            Document(
                id=f"background-{i + 1}",
                title=f"General Principles {i + 1}",
                text=text,
                source_type="textbook",
                year=2000 + i,
                tags=("general",),
            )
        )
    return docs


def planted_benchmark(
    n_questions: int = 48,
    regions_per_topic: int = 6,
    seed: int = 0,
    with_background: bool = True,
) -> tuple[list[Document], list[EvalQuestion]]:
    """Build the dual-region planted-answer corpus and its benchmark.

    Each question's home region alternates between North Carolina and
    California. The topic is replicated in the home region plus
    ``regions_per_topic - 1`` others, with distinct values per region.
    Chunk ids are ``<doc id>#0`` because topic documents fit in one chunk.
    """
    topics = [(c, p) for p in PRACTICES for c in CROPS]
    if n_questions > len(topics):
        raise ValueError(f"at most {len(topics)} questions available")
    if not 2 <= regions_per_topic <= len(REGIONS):
        raise ValueError(f"regions_per_topic must be in [2, {len(REGIONS)}]")
    rng = random.Random(seed)
    rng.shuffle(topics)
    docs: list[Document] = []
    questions: list[EvalQuestion] = []
    codes = list(REGIONS)
    for qi, (crop, practice) in enumerate(topics[:n_questions]):
        home = REGIONS[HOME_REGIONS[qi % 2]]
        others = [c for c in codes if c != home.code]
        rng.shuffle(others)
        regions = [home] + [REGIONS[c] for c in others[: regions_per_topic - 1]]
        values = rng.sample(practice[5], len(regions))
        planted_home = ""
        for region, value in zip(regions, values):
            doc, planted = _topic_doc(crop, practice, region, value, rng, rng.randint(2012, 2024))
            docs.append(doc)
            if region is home:
                planted_home = planted
                home_chunk = f"{doc.id}#0"
        questions.append(
            EvalQuestion(
                qid=f"q{qi + 1:03d}",
                question=practice[3].format(crop=crop),
                reference_answer=planted_home,
                subdomain=practice[1],
                region_tags=(home.code,),
                relevant_chunk_ids=(home_chunk,),
                reference_facts=(planted_home,),
                location=home.centroid,
            )
        )
    if with_background:
        docs.extend(background_documents(seed=seed))
    docs.sort(key=lambda d: d.id)
    return docs, questions
