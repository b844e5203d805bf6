"""Document ingestion, section detection and overlapping chunking."""

from __future__ import annotations

import hashlib
import json
import re
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from pathlib import Path

from regionrag.errors import CorpusError
from regionrag.geo import GeoPoint, RegionTag, as_region_tags

SOURCE_TYPES = ("journal", "textbook", "extension", "report")

DEFAULT_CHUNK_SIZE = 300
DEFAULT_OVERLAP = 50


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    text: str
    source_type: str
    year: int | None = None
    region_tags: tuple[RegionTag, ...] = ()
    centroid: GeoPoint | None = None
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")
        if not self.text or not self.text.strip():
            raise ValueError(f"document {self.id!r} has empty text")
        if self.source_type not in SOURCE_TYPES:
            raise ValueError(
                f"document {self.id!r}: source_type must be one of {SOURCE_TYPES}, "
                f"got {self.source_type!r}"
            )
        if self.year is not None and self.year < 1800:
            raise ValueError(f"document {self.id!r}: implausible year {self.year}")
        object.__setattr__(self, "region_tags", as_region_tags(self.region_tags))
        object.__setattr__(self, "tags", tuple(self.tags))

    @classmethod
    def from_dict(cls, d: dict) -> Document:
        centroid = d.get("centroid")
        year = d.get("year")
        return cls(
            id=str(d["id"]),
            title=str(d.get("title", "")),
            text=d["text"],
            source_type=d["source_type"],
            year=int(year) if year is not None else None,
            region_tags=tuple(d.get("region_tags", ())),
            centroid=GeoPoint.from_dict(centroid) if centroid is not None else None,
            tags=tuple(d.get("tags", ())),
        )

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "title": self.title,
            "text": self.text,
            "source_type": self.source_type,
            "year": self.year,
            "region_tags": [r.code for r in self.region_tags],
            "tags": list(self.tags),
        }
        if self.centroid is not None:
            d["centroid"] = self.centroid.to_dict()
        return d

    def content_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Section:
    heading: str
    start_token: int
    end_token: int

    def __post_init__(self):
        if self.start_token >= self.end_token:
            raise ValueError("section must span at least one token")


@dataclass(frozen=True)
class ChunkMetadata:
    document_id: str
    source_type: str
    year: int | None
    region_tags: tuple[RegionTag, ...]
    centroid: GeoPoint | None
    tags: tuple[str, ...]
    heading: str = ""
    title: str = ""

    def to_dict(self) -> dict:
        return {
            "document_id": self.document_id,
            "source_type": self.source_type,
            "year": self.year,
            "region_tags": [r.code for r in self.region_tags],
            "centroid": self.centroid.to_dict() if self.centroid else None,
            "tags": list(self.tags),
            "heading": self.heading,
            "title": self.title,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ChunkMetadata:
        return cls(
            document_id=d["document_id"],
            source_type=d["source_type"],
            year=d["year"],
            region_tags=as_region_tags(d["region_tags"]),
            centroid=GeoPoint.from_dict(d["centroid"]) if d["centroid"] else None,
            tags=tuple(d["tags"]),
            heading=d["heading"],
            title=d.get("title", ""),
        )


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    document_id: str
    text: str
    token_span: tuple[int, int]
    heading: str
    metadata: ChunkMetadata = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "document_id": self.document_id,
            "text": self.text,
            "token_span": list(self.token_span),
            "heading": self.heading,
            "metadata": self.metadata.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Chunk:
        return cls(
            chunk_id=d["chunk_id"],
            document_id=d["document_id"],
            text=d["text"],
            token_span=(int(d["token_span"][0]), int(d["token_span"][1])),
            heading=d["heading"],
            metadata=ChunkMetadata.from_dict(d["metadata"]),
        )


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization; ``" ".join(tokenize(t))`` is the normalized text."""
    return text.split()


_TOKEN = re.compile(r"\S+")
_MD_HEADING = re.compile(r"^\s{0,3}(#{1,6})\s+(\S.*?)\s*#*\s*$")
_NUMBERED_HEADING = re.compile(r"^\s*(\d+(?:\.\d+)*)\.?\s+([A-Z][^.!?:;]*)$")
_MAX_HEADING_WORDS = 12


def _heading_of(line: str) -> str | None:
    stripped = line.strip()
    if not stripped:
        return None
    m = _MD_HEADING.match(stripped)
    if m:
        return m.group(2).strip()
    words = stripped.split()
    if len(words) > _MAX_HEADING_WORDS:
        return None
    m = _NUMBERED_HEADING.match(stripped)
    if m and len(words) >= 2:
        return stripped
    letters = [c for c in stripped if c.isalpha()]
    if len(letters) >= 3 and all(c.isupper() for c in letters):
        return stripped
    return None


def detect_sections(text: str) -> list[Section]:
    """Split a document into heading-delimited sections over its token stream.

    Headings are markdown ``#`` lines, short ALL-CAPS lines and numbered title
    lines such as ``2. Soil Fertility``. The heading line's own tokens belong to
    the section it opens, so sections tile the whole token range. Text before
    the first heading forms a section with an empty heading. Empty text yields
    no sections.
    """
    sections: list[Section] = []
    heading = ""
    start = 0
    pos = 0
    for line in text.splitlines():
        n = len(tokenize(line))
        if n == 0:
            continue
        h = _heading_of(line)
        if h is not None:
            if pos > start:
                sections.append(Section(heading, start, pos))
            heading, start = h, pos
        pos += n
    if pos > start:
        sections.append(Section(heading, start, pos))
    return sections


def window_spans(n_tokens: int, chunk_size: int, overlap: int) -> list[tuple[int, int]]:
    """Sliding-window spans with step ``chunk_size - overlap``; the last may be short."""
    if chunk_size <= overlap:
        raise ValueError(f"chunk_size ({chunk_size}) must exceed overlap ({overlap})")
    if overlap < 0:
        raise ValueError("overlap must be non-negative")
    step = chunk_size - overlap
    spans = []
    start = 0
    while start < n_tokens:
        end = min(start + chunk_size, n_tokens)
        spans.append((start, end))
        if end == n_tokens:
            break
        start += step
    return spans


def chunk_document(
    doc: Document,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_OVERLAP,
    tokenizer: Callable[[str], list[str]] = tokenize,
) -> list[Chunk]:
    """Cut a document into overlapping chunks tagged with the parent's metadata.

    Each chunk takes the heading of the section containing its first token.
    The body is the source text from the chunk's first token to its last, so
    its whitespace tokens are exactly the window's tokens.
    A non-empty heading is prepended as a ``Heading: ...`` line that does not
    count toward ``chunk_size``.
    """
    tokens = tokenizer(doc.text)
    # section offsets are in whitespace tokens; other tokenizers get no headings
    native = tokenizer is tokenize
    sections = detect_sections(doc.text) if native else []
    # char offsets let chunk bodies keep the source line breaks
    offsets = [m.span() for m in _TOKEN.finditer(doc.text)] if native else []
    spans = window_spans(len(tokens), chunk_size, overlap)

    chunks = []
    sec_i = 0
    for ordinal, (s, e) in enumerate(spans):
        while sec_i + 1 < len(sections) and sections[sec_i].end_token <= s:
            sec_i += 1
        heading = sections[sec_i].heading if sections else ""
        body = doc.text[offsets[s][0] : offsets[e - 1][1]] if native else " ".join(tokens[s:e])
        text = f"Heading: {heading}\n{body}" if heading else body
        meta = ChunkMetadata(
            document_id=doc.id,
            source_type=doc.source_type,
            year=doc.year,
            region_tags=doc.region_tags,
            centroid=doc.centroid,
            tags=doc.tags,
            heading=heading,
            title=doc.title,
        )
        chunks.append(Chunk(f"{doc.id}#{ordinal}", doc.id, text, (s, e), heading, meta))
    return chunks


def chunk_corpus(
    docs: Iterable[Document],
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_OVERLAP,
) -> list[Chunk]:
    out = []
    for doc in docs:
        out.extend(chunk_document(doc, chunk_size, overlap))
    return out


def load_corpus(path: str | Path) -> list[Document]:
    """Read a JSONL corpus, one document per non-blank line.

    Raises :class:`CorpusError` carrying the offending line number(s) on a
    parse or schema failure, or both line numbers for a duplicate id.
    """
    docs: list[Document] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})", (lineno,)) from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"line {lineno}: expected a JSON object", (lineno,))
            missing = [k for k in ("id", "text", "source_type") if k not in obj]
            if missing:
                raise CorpusError(
                    f"line {lineno}: missing required field(s) {', '.join(missing)}", (lineno,)
                )
            try:
                doc = Document.from_dict(obj)
            except (ValueError, TypeError, KeyError) as exc:
                raise CorpusError(f"line {lineno}: {exc}", (lineno,)) from exc
            if doc.id in seen:
                first = seen[doc.id]
                raise CorpusError(
                    f"duplicate document id {doc.id!r} on lines {first} and {lineno}",
                    (first, lineno),
                )
            seen[doc.id] = lineno
            docs.append(doc)
    return docs


def write_corpus(docs: Iterable[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_dict(), ensure_ascii=False) + "\n")
