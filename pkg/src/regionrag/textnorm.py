"""Text normalization shared by the metrics, the offline generator and the hash embedder."""

from __future__ import annotations

import re

# 40 function words. Prepositions are deliberately absent: in agronomic
# answers "in fall" or "before planting" carry the timing.
STOPWORDS = frozenset(
    """
    a an the and or but if then so
    is are was were be been being am do does did
    it its this that these those there
    i you he she we they me my your our their
    what which
    """.split()
)
assert len(STOPWORDS) == 40

# Periods and commas survive only between digits ("6.5", "1,000").
_PUNCT = re.compile(r"(?<!\d)[.,]|[.,](?!\d)|[^\w\s.,]|_")
_WORD = re.compile(r"\w+")


def normalize_text(s: str, remove_stopwords: bool = True) -> str:
    """Lowercase, strip punctuation (keeping decimals), drop stopwords, collapse spaces."""
    s = _PUNCT.sub(" ", s.lower())
    tokens = s.split()
    if remove_stopwords:
        tokens = [t for t in tokens if t not in STOPWORDS]
    return " ".join(tokens)


def normalized_tokens(s: str, remove_stopwords: bool = True) -> list[str]:
    return normalize_text(s, remove_stopwords).split()


def word_tokens(s: str) -> list[str]:
    """Lowercased alphanumeric runs; used where punctuation handling does not matter."""
    return _WORD.findall(s.lower())


_SENTENCE_END = re.compile(r"(?<=[.!?])\s+(?=\S)")


def split_sentences(text: str) -> list[str]:
    """Sentence split on terminal punctuation followed by whitespace.

    Decimals such as ``6.5`` are safe because no whitespace follows the period.
    """
    out = []
    for line in text.splitlines():
        for part in _SENTENCE_END.split(line.strip()):
            part = part.strip()
            if part:
                out.append(part)
    return out
