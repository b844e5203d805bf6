"""The fixed question and hits behind the golden prompt file."""

from __future__ import annotations

from pathlib import Path

from conftest import three_docs
from regionrag.corpus import chunk_document
from regionrag.index import ScoredHit

GOLDEN_PROMPT = Path(__file__).parent / "golden" / "prompt_nc.txt"
QUESTION = "When should I apply lime to my field?"

# verbatim clauses of the published template, NC default
TEMPLATE_CLAUSES = (
    "You are an agricultural expert specializing in North Carolina production systems.",
    "Base your answer strictly on the retrieved passages and assume the user is farming in North Carolina.",
    "Adjust any ranges, timings, or recommendations to North Carolina conditions if the evidence supports it.",
)


def golden_hits() -> list[ScoredHit]:
    docs = three_docs()
    chunks = [chunk_document(docs[0])[0], chunk_document(docs[2])[0]]
    return [ScoredHit(c.chunk_id, c, 0.5, 1.0, 0.75, rank=i + 1) for i, c in enumerate(chunks)]
