from __future__ import annotations

import pytest

from regionrag.corpus import Document, write_corpus
from regionrag.embed import HashEmbeddingProvider
from regionrag.evalkit.benchmark import write_benchmark
from regionrag.geo import GeoPoint
from regionrag.index import VectorStore
from regionrag.synthetic import planted_benchmark


@pytest.fixture(scope="session")
def provider() -> HashEmbeddingProvider:
    return HashEmbeddingProvider(512)


@pytest.fixture(scope="session")
def planted():
    return planted_benchmark(n_questions=48, seed=0)


@pytest.fixture(scope="session")
def planted_store(planted, provider) -> VectorStore:
    docs, _ = planted
    store = VectorStore(provider.dim, provider.provider_id)
    store.sync_documents(docs, provider)
    store.build_hnsw(seed=0)
    return store


def three_docs() -> list[Document]:
    return [
        Document(
            "nc-lime",
            "Liming Soils in North Carolina",
            "# Liming\nApply lime in fall to raise soil pH to 6.5 for most field crops in North Carolina.",
            "extension",
            2019,
            ("US-NC",),
            GeoPoint(35.5557, -79.3877),
            ("soil",),
        ),
        Document(
            "ca-lime",
            "Liming Soils in California",
            "# Liming\nApply lime in spring to raise soil pH to 6.0 for most field crops in California.",
            "extension",
            2012,
            ("US-CA",),
            GeoPoint(36.7783, -119.4179),
            ("soil",),
        ),
        Document(
            "textbook-soil",
            "Soil Chemistry",
            "SOIL ACIDITY\nSoil acidity limits nutrient availability. " + "Buffer capacity varies by texture. " * 120,
            "textbook",
            2008,
        ),
    ]


@pytest.fixture
def corpus_dir(tmp_path):
    write_corpus(three_docs(), tmp_path / "corpus.jsonl")
    return tmp_path


@pytest.fixture
def planted_dir(tmp_path, planted):
    docs, questions = planted
    write_corpus(docs, tmp_path / "corpus.jsonl")
    write_benchmark(questions, tmp_path / "bench.jsonl")
    return tmp_path


# acceptance criteria report one line each; printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
