import json
import threading

import httpx
import numpy as np
import pytest

from regionrag.embed import (
    EmbeddingVector,
    HashEmbeddingProvider,
    RemoteEmbeddingProvider,
    cosine,
    hash_embed,
    hash_vector,
    prepare_text,
)
from regionrag.errors import DimensionMismatchError, TransportError


def test_hash_embed_empty_is_degenerate():
    v = hash_embed("", 512)
    assert v.is_degenerate and v.norm == 0.0
    assert cosine(v, hash_embed("soil", 512)) == 0.0
    assert cosine(v, v) == 0.0


def test_hash_embed_unit_norm_and_determinism():
    a = hash_embed("Apply lime in fall", 512)
    b = hash_embed("Apply lime in fall", 512)
    assert a == b
    assert a.values.tobytes() == b.values.tobytes()
    assert a.norm == pytest.approx(1.0, abs=1e-9)
    assert cosine(a, b) == pytest.approx(1.0, abs=1e-12)


def test_hash_embed_requires_dim_8():
    with pytest.raises(ValueError):
        hash_vector("x", 4)


@pytest.mark.parametrize(
    "s1,s2",
    [
        ("apply lime in fall", "tobacco transplant spacing matters"),
        ("nitrogen rates for corn", "blueberry pruning during winter months"),
        ("irrigate peanuts weekly", "soybean rust scouting guide"),
    ],
)
def test_disjoint_sentences_low_cosine(s1, s2):
    assert abs(cosine(hash_embed(s1, 512), hash_embed(s2, 512))) < 0.2


def test_cosine_examples():
    v = np.array([0.3, -1.2, 2.0])
    assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)
    assert cosine(v, -v) == pytest.approx(-1.0, abs=1e-12)
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0
    with pytest.raises(DimensionMismatchError):
        cosine(np.ones(3), np.ones(4))


def test_cosine_symmetry_and_scale():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b = rng.normal(size=16), rng.normal(size=16)
        assert cosine(a, b) == pytest.approx(cosine(b, a), abs=1e-9)
        assert cosine(2 * a, b) == pytest.approx(cosine(a, b), abs=1e-9)


def test_embedding_vector_validation():
    with pytest.raises(ValueError):
        EmbeddingVector(np.array([1.0, np.nan]), "p")
    v = EmbeddingVector([3.0, 4.0], "p")
    assert v.dim == 2
    assert np.allclose(v.unit(), [0.6, 0.8])
    with pytest.raises(ValueError):
        v.values[0] = 1.0


def test_provider_prefix_and_whitespace():
    p = HashEmbeddingProvider(64)
    a = p.embed_text("soil nitrogen")
    b = p.embed_text("  soil \n nitrogen\t")
    assert a == b
    assert all(s.startswith("text: ") for s in p.log)
    assert list(p.log)[:2] == ["text: soil nitrogen", "text: soil nitrogen"]
    assert a.provider_id == "hash-64" and a.dim == 64


def test_provider_rejects_empty():
    with pytest.raises(ValueError):
        HashEmbeddingProvider(64).embed_text("   ")
    assert prepare_text("a  b") == "text: a b"


def _fake_server(dim, record, status=200, reverse=False):
    lock = threading.Lock()

    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        with lock:
            record.append((str(request.url), dict(request.headers), body))
        if status != 200:
            return httpx.Response(status, text="boom")
        rows = [
            {"index": i, "embedding": [float(len(t))] + [float(i)] * (dim - 1)}
            for i, t in enumerate(body["input"])
        ]
        if reverse:
            rows.reverse()
        return httpx.Response(200, json={"data": rows, "model": body["model"]})

    return httpx.Client(transport=httpx.MockTransport(handler))


def test_remote_provider_wire_format(monkeypatch):
    monkeypatch.setenv("RR_TEST_KEY", "sekret")
    calls = []
    p = RemoteEmbeddingProvider(
        "http://emb.local/v1/", dim=1536, api_key_env="RR_TEST_KEY", client=_fake_server(1536, calls)
    )
    v = p.embed_text("soil nitrogen")
    assert v.dim == 1536
    url, headers, body = calls[0]
    assert url == "http://emb.local/v1/embeddings"
    assert headers["authorization"] == "Bearer sekret"
    assert body == {"model": "text-embedding-ada-002", "input": ["text: soil nitrogen"]}


def test_remote_provider_batches_and_order():
    calls = []
    p = RemoteEmbeddingProvider(
        "http://x", dim=4, batch_size=3, max_parallel=3, client=_fake_server(4, calls, reverse=True)
    )
    texts = [f"t{i}" * (i + 1) for i in range(10)]
    vecs = p.embed_texts(texts)
    assert len(calls) == 4
    assert sorted(len(c[2]["input"]) for c in calls) == [1, 3, 3, 3]
    # rows placed by index despite reversed responses
    assert [v.values[0] for v in vecs] == [float(len(prepare_text(t))) for t in texts]


def test_remote_dimension_mismatch_is_hard_error():
    p = RemoteEmbeddingProvider("http://x", dim=1536, client=_fake_server(8, []))
    with pytest.raises(DimensionMismatchError):
        p.embed_text("x")


@pytest.mark.parametrize("status,retryable", [(503, True), (429, True), (400, False), (401, False)])
def test_remote_transport_error_carries_status(status, retryable):
    p = RemoteEmbeddingProvider("http://x", dim=4, client=_fake_server(4, [], status=status))
    with pytest.raises(TransportError) as err:
        p.embed_text("x")
    assert err.value.status == status
    assert err.value.retryable is retryable


def test_remote_connection_failure_is_retryable():
    def handler(request):
        raise httpx.ConnectError("refused")

    p = RemoteEmbeddingProvider("http://x", dim=4, client=httpx.Client(transport=httpx.MockTransport(handler)))
    with pytest.raises(TransportError) as err:
        p.embed_text("x")
    assert err.value.retryable and err.value.status is None
