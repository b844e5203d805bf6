"""Prompt assembly from ranked evidence and answer generation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Protocol

import httpx

from regionrag.errors import EmptyAnswerError, TransportError
from regionrag.http import post_json
from regionrag.index import ScoredHit
from regionrag.textnorm import normalized_tokens, split_sentences

DEFAULT_REGION = "North Carolina"
NO_PASSAGES = "(no passages retrieved)"
NO_EVIDENCE_ANSWER = "No retrieved evidence is available to answer this question."

SYSTEM_TEMPLATE = (
    "You are an agricultural expert specializing in {region} production systems.\n"
    "Base your answer strictly on the retrieved passages and assume the user is farming in {region}.\n"
    "Adjust any ranges, timings, or recommendations to {region} conditions if the evidence supports it."
)
CITATION_CLAUSE = "Cite the passages you rely on by their bracketed labels, e.g. [1]."


@dataclass(frozen=True)
class GenerationConfig:
    temperature: float = 0.2
    max_output_tokens: int = 256
    model: str = "llama-3-13b-instruct"
    region_name: str = DEFAULT_REGION
    cite_passages: bool = False

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class Passage:
    label: int
    chunk_id: str
    heading: str
    source: dict
    text: str

    def render(self) -> str:
        s = self.source
        year = s.get("year") if s.get("year") is not None else "n.d."
        regions = ", ".join(s.get("region_tags") or []) or "none"
        title = s.get("title") or s.get("document_id")
        head = f"[{self.label}] Source: {title} ({s.get('source_type')}, {year}); regions: {regions}; id: {self.chunk_id}"
        return f"{head}\n{self.text}"


@dataclass(frozen=True)
class PromptBundle:
    system_instruction: str
    question: str
    passages: tuple[Passage, ...]

    @property
    def user_content(self) -> str:
        if self.passages:
            body = "\n\n".join(p.render() for p in self.passages)
        else:
            body = NO_PASSAGES
        return f"Request: {self.question}\n\nRetrieved Passages:\n{body}"

    @property
    def rendered(self) -> str:
        return f"System Instruction:\n{self.system_instruction}\n\n{self.user_content}\n"

    def messages(self) -> list[dict]:
        return [
            {"role": "system", "content": self.system_instruction},
            {"role": "user", "content": self.user_content},
        ]


def assemble_prompt(question: str, hits: list[ScoredHit], cfg: GenerationConfig = GenerationConfig()) -> PromptBundle:
    """Build the prompt; ``hits`` are rendered in the given (rank) order as [1]..[k]."""
    system = SYSTEM_TEMPLATE.format(region=cfg.region_name)
    if cfg.cite_passages:
        system += "\n" + CITATION_CLAUSE
    passages = []
    for i, hit in enumerate(hits, start=1):
        meta = hit.chunk.metadata
        src = {
            "document_id": meta.document_id,
            "title": meta.title,
            "source_type": meta.source_type,
            "year": meta.year,
            "region_tags": [r.code for r in meta.region_tags],
        }
        passages.append(Passage(i, hit.chunk_id, hit.chunk.heading, src, hit.chunk.text))
    return PromptBundle(system, question.strip(), tuple(passages))


@dataclass(frozen=True)
class Completion:
    text: str
    usage: dict = field(default_factory=dict)


class ChatClient(Protocol):
    def complete(self, bundle: PromptBundle, cfg: GenerationConfig) -> Completion: ...


_CITATION = re.compile(r"\[(\d+(?:\s*,\s*\d+)*)\]")


def parse_citations(text: str) -> tuple[int, ...]:
    labels = set()
    for m in _CITATION.finditer(text):
        labels.update(int(x) for x in m.group(1).split(","))
    return tuple(sorted(labels))


def strip_citations(text: str) -> str:
    return " ".join(_CITATION.sub(" ", text).split())


@dataclass(frozen=True)
class AnswerRecord:
    text: str
    citations: tuple[int, ...]
    usage: dict = field(default_factory=dict)

    @property
    def answer(self) -> str:
        """The answer with ``[n]`` citation markers removed."""
        return strip_citations(self.text)


def _body(passage_text: str) -> str:
    lines = passage_text.splitlines()
    if lines and lines[0].startswith("Heading: "):
        lines = lines[1:]
    return "\n".join(lines)


class OfflineStubClient:
    """Extractive stand-in for a chat model.

    Returns the passage sentence that shares the most distinct normalized
    tokens with the question, preferring higher-ranked passages and earlier
    sentences on ties, followed by that passage's citation label.
    """

    def complete(self, bundle: PromptBundle, cfg: GenerationConfig) -> Completion:
        qtok = set(normalized_tokens(bundle.question))
        best = None
        for p in bundle.passages:
            for sent in split_sentences(_body(p.text)):
                score = len(qtok & set(normalized_tokens(sent)))
                if best is None or score > best[0]:
                    best = (score, sent, p.label)
        if best is None:
            text = NO_EVIDENCE_ANSWER
        else:
            text = f"{best[1]} [{best[2]}]"
        return Completion(text, {"prompt_chars": len(bundle.rendered), "completion_chars": len(text)})


class ChatCompletionClient:
    """Client for an OpenAI-compatible ``/chat/completions`` endpoint."""

    def __init__(
        self,
        base_url: str,
        api_key_env: str | None = "OPENAI_API_KEY",
        timeout: float = 120.0,
        client: httpx.Client | None = None,
    ):
        self.url = base_url.rstrip("/") + "/chat/completions"
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.client = client or httpx.Client()

    def complete(self, bundle: PromptBundle, cfg: GenerationConfig) -> Completion:
        payload = {
            "model": cfg.model,
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_output_tokens,
            "messages": bundle.messages(),
        }
        body = post_json(self.client, self.url, payload, self.api_key_env, self.timeout)
        try:
            text = body["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError("chat response lacks choices[0].message.content", retryable=False) from exc
        return Completion(text, body.get("usage") or {})


def generate(client: ChatClient, bundle: PromptBundle, cfg: GenerationConfig = GenerationConfig()) -> AnswerRecord:
    completion = client.complete(bundle, cfg)
    text = completion.text.strip()
    if not text:
        raise EmptyAnswerError("model returned an empty completion")
    return AnswerRecord(text, parse_citations(text), dict(completion.usage))
