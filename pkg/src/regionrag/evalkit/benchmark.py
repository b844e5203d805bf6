"""Benchmark loading, the variant grid, the experiment runner and its report."""

from __future__ import annotations

import csv
import json
import logging
import math
import zlib
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from regionrag.answer import AnswerRecord, ChatClient, GenerationConfig, assemble_prompt, generate
from regionrag.embed import EmbeddingProvider
from regionrag.errors import CorpusError, RegionRagError
from regionrag.evalkit.lexical import bleu4, exact_match, rouge_l, token_f1
from regionrag.evalkit.semantic import (
    EmbeddingJudge,
    HashEncoder,
    SentenceEncoder,
    unit_rows,
    answer_relevance,
    bertscore_f1,
    context_precision,
    context_recall,
    faithfulness,
    ragas_score,
)
from regionrag.evalkit.stats import cliffs_delta, paired_bootstrap
from regionrag.geo import GeoPoint, RegionTag, UserLocation, as_region_tags
from regionrag.index import MetadataFilter, ScoredHit, VectorStore
from regionrag.rank import FusionConfig, retrieve
from regionrag.textnorm import normalize_text

log = logging.getLogger(__name__)

SUBDOMAINS = (
    "Agronomy",
    "Soil",
    "Pathology",
    "Weeds",
    "Irrigation",
    "Horticulture",
    "Postharvest",
    "Animal",
    "Aquaculture",
    "Food Safety",
    "Economics",
    "Extension",
)

METRICS = (
    "em",
    "f1",
    "bleu4",
    "rouge_l",
    "bertscore",
    "context_precision",
    "context_recall",
    "faithfulness",
    "answer_relevance",
    "ragas",
)
RETRIEVAL_METRICS = ("context_precision", "context_recall", "faithfulness", "ragas")
SIGNIFICANCE_METRICS = ("em", "f1", "bertscore")
DEFAULT_SEEDS = (1, 2, 3)


@dataclass(frozen=True)
class EvalQuestion:
    qid: str
    question: str
    reference_answer: str
    subdomain: str = ""
    region_tags: tuple[RegionTag, ...] = ()
    relevant_chunk_ids: tuple[str, ...] = ()
    reference_facts: tuple[str, ...] = ()
    location: GeoPoint | None = None

    def __post_init__(self):
        if not self.qid:
            raise ValueError("qid must be non-empty")
        if not self.reference_answer.strip():
            raise ValueError(f"question {self.qid!r}: reference_answer must be non-empty")
        object.__setattr__(self, "region_tags", as_region_tags(self.region_tags))
        object.__setattr__(self, "relevant_chunk_ids", tuple(self.relevant_chunk_ids))
        object.__setattr__(self, "reference_facts", tuple(self.reference_facts))

    @property
    def user(self) -> UserLocation:
        return UserLocation(self.location, self.region_tags)

    @classmethod
    def from_dict(cls, d: dict) -> EvalQuestion:
        loc = d.get("location")
        return cls(
            qid=str(d["qid"]),
            question=d["question"],
            reference_answer=d["reference_answer"],
            subdomain=d.get("subdomain", ""),
            region_tags=tuple(d.get("region_tags", ())),
            relevant_chunk_ids=tuple(d.get("relevant_chunk_ids", ())),
            reference_facts=tuple(d.get("reference_facts", ())),
            location=GeoPoint.from_dict(loc) if loc else None,
        )

    def to_dict(self) -> dict:
        d = {
            "qid": self.qid,
            "question": self.question,
            "reference_answer": self.reference_answer,
            "subdomain": self.subdomain,
            "region_tags": [r.code for r in self.region_tags],
            "relevant_chunk_ids": list(self.relevant_chunk_ids),
            "reference_facts": list(self.reference_facts),
        }
        if self.location is not None:
            d["location"] = self.location.to_dict()
        return d


def load_benchmark(path: str | Path) -> list[EvalQuestion]:
    out: list[EvalQuestion] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                q = EvalQuestion.from_dict(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})", (lineno,)) from exc
            except (KeyError, ValueError, TypeError) as exc:
                raise CorpusError(f"line {lineno}: {exc}", (lineno,)) from exc
            if q.qid in seen:
                raise CorpusError(
                    f"duplicate qid {q.qid!r} on lines {seen[q.qid]} and {lineno}", (seen[q.qid], lineno)
                )
            seen[q.qid] = lineno
            out.append(q)
    return out


def write_benchmark(questions: Sequence[EvalQuestion], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in questions:
            fh.write(json.dumps(q.to_dict(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class Variant:
    """One experimental condition. ``None`` fields inherit the pipeline setting."""

    name: str
    mode: str = "rag"  # rag | norag | random
    top_k: int | None = None
    alpha: float | None = None


VARIANTS = {
    "full": Variant("full"),
    "semantic": Variant("semantic", alpha=0.0),
    "norag": Variant("norag", mode="norag"),
    "topk2": Variant("topk2", top_k=2),
    "topk8": Variant("topk8", top_k=8),
    "random": Variant("random", mode="random"),
}
ABLATION_GRID = ("full", "norag", "topk2", "topk8", "random")


def resolve_variants(names: Sequence[str | Variant]) -> list[Variant]:
    out = []
    for v in names:
        if isinstance(v, Variant):
            out.append(v)
        elif v in VARIANTS:
            out.append(VARIANTS[v])
        else:
            raise ValueError(f"unknown variant {v!r}; known: {', '.join(VARIANTS)}")
    return out


@dataclass
class Pipeline:
    store: VectorStore
    provider: EmbeddingProvider
    client: ChatClient
    fusion: FusionConfig = FusionConfig()
    generation: GenerationConfig = GenerationConfig()
    encoder: SentenceEncoder = field(default_factory=HashEncoder)
    judge: object | None = None
    filter: MetadataFilter | None = None

    def __post_init__(self):
        if self.judge is None:
            self.judge = EmbeddingJudge(self.encoder)

    def hits_for(self, q: EvalQuestion, variant: Variant, seed: int) -> list[ScoredHit]:
        cfg = self.fusion
        if variant.top_k is not None:
            cfg = replace(cfg, top_k=variant.top_k)
        if variant.alpha is not None:
            cfg = replace(cfg, alpha=variant.alpha)
        if variant.mode == "norag":
            return []
        if variant.mode == "random":
            ids = self.store.chunk_ids()
            rng = np.random.default_rng([seed, zlib.crc32(q.qid.encode("utf-8"))])
            picked = rng.choice(len(ids), size=min(cfg.top_k, len(ids)), replace=False)
            return [
                ScoredHit(ids[i], self.store.chunk(ids[i]), 0.0, rank=r + 1)
                for r, i in enumerate(picked)
            ]
        return retrieve(self.store, q.question, q.user, self.provider, cfg, self.filter)

    def answer(self, q: EvalQuestion, hits: list[ScoredHit]) -> AnswerRecord:
        bundle = assemble_prompt(q.question, hits, self.generation)
        return generate(self.client, bundle, self.generation)


@dataclass
class EvalRecord:
    qid: str
    variant: str
    seed: int
    subdomain: str
    retrieved_ids: list[str]
    retrieved_texts: list[str]
    answer: str
    metrics: dict[str, float | None]
    warnings: list[str] = field(default_factory=list)


def _fact_recall(facts: Sequence[str], texts: Sequence[str]) -> float:
    blob = normalize_text(" ".join(texts))
    return sum(1 for f in facts if normalize_text(f) in blob) / len(facts)


def score_record(
    q: EvalQuestion,
    variant: Variant,
    seed: int,
    hits: list[ScoredHit],
    answer: str,
    encoder: SentenceEncoder,
    judge,
) -> EvalRecord:
    ids = [h.chunk_id for h in hits]
    texts = [h.chunk.text for h in hits]
    warnings = []
    m: dict[str, float | None] = {
        "em": float(exact_match(answer, q.reference_answer)),
        "f1": token_f1(answer, q.reference_answer),
        "bleu4": bleu4(answer, q.reference_answer),
        "rouge_l": rouge_l(answer, q.reference_answer),
        "bertscore": bertscore_f1(answer, q.reference_answer, encoder),
        "answer_relevance": answer_relevance(q.question, answer, encoder),
    }
    if variant.mode == "norag":
        for name in RETRIEVAL_METRICS:
            m[name] = None
    else:
        if q.relevant_chunk_ids:
            m["context_precision"] = context_precision(ids, q.relevant_chunk_ids)
        else:
            m["context_precision"] = None
            warnings.append(f"{q.qid}: no relevant_chunk_ids; context_precision excluded")
        if not q.reference_facts:
            m["context_recall"] = None
            warnings.append(f"{q.qid}: no reference_facts; context_recall excluded")
        elif q.relevant_chunk_ids:
            m["context_recall"] = context_recall(ids, q.relevant_chunk_ids)
        else:
            m["context_recall"] = _fact_recall(q.reference_facts, texts)
        m["faithfulness"] = faithfulness(answer, texts, judge)
        m["ragas"] = ragas_score(
            m["context_precision"], m["context_recall"], m["faithfulness"], m["answer_relevance"]
        )
    return EvalRecord(q.qid, variant.name, seed, q.subdomain, ids, texts, answer, m, warnings)


def _mean(xs) -> float | None:
    xs = [x for x in xs if x is not None]
    return float(sum(xs) / len(xs)) if xs else None


@dataclass
class MetricReport:
    variants: list[str]
    seeds: list[int]
    baseline: str
    per_seed: dict[str, dict[int, dict[str, float | None]]]
    means: dict[str, dict[str, float | None]]
    counts: dict[str, dict[str, int]]
    subdomains: dict[str, dict[str, dict[str, float | None]]]
    significance: dict[str, dict[str, dict[str, float]]]
    warnings: list[str]
    records: list[EvalRecord] = field(repr=False, default_factory=list)

    def to_dict(self, include_records: bool = False) -> dict:
        d = {
            "variants": self.variants,
            "seeds": self.seeds,
            "baseline": self.baseline,
            "per_seed": {v: {str(s): m for s, m in ps.items()} for v, ps in self.per_seed.items()},
            "means": self.means,
            "counts": self.counts,
            "subdomains": self.subdomains,
            "significance": self.significance,
            "warnings": self.warnings,
        }
        if include_records:
            d["records"] = [r.__dict__ for r in self.records]
        return d

    def to_json(self, path: str | Path, include_records: bool = False) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(include_records), indent=2, sort_keys=True), encoding="utf-8"
        )

    def rows(self) -> list[dict]:
        """One row per (variant, metric) with each seed's mean and the mean over seeds."""
        out = []
        for v in self.variants:
            for metric in METRICS:
                row = {"variant": v, "metric": metric}
                for s in self.seeds:
                    row[f"seed_{s}"] = self.per_seed[v][s].get(metric)
                row["mean"] = self.means[v].get(metric)
                row["n"] = self.counts[v].get(metric, 0)
                sig = self.significance.get(v, {}).get(metric, {})
                row["p_value"] = sig.get("p_value")
                row["cliffs_delta"] = sig.get("cliffs_delta")
                out.append(row)
        return out

    def to_csv(self, path: str | Path) -> None:
        rows = self.rows()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            for r in rows:
                w.writerow({k: ("" if v is None else v) for k, v in r.items()})

    def subdomain_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["variant", "subdomain", "metric", "mean"])
            for v in self.variants:
                for sd, ms in sorted(self.subdomains[v].items()):
                    for metric in METRICS:
                        val = ms.get(metric)
                        w.writerow([v, sd, metric, "" if val is None else val])

    def records_for(self, variant: str, seed: int | None = None) -> list[EvalRecord]:
        seed = self.seeds[0] if seed is None else seed
        return [r for r in self.records if r.variant == variant and r.seed == seed]


def run_benchmark(
    questions: Sequence[EvalQuestion],
    pipeline: Pipeline,
    variants: Sequence[str | Variant] = ABLATION_GRID,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    baseline: str = "full",
    resamples: int = 10_000,
    jobs: int = 1,
) -> MetricReport:
    """Run every variant over every question for each seed and aggregate.

    Questions may be processed concurrently; aggregation always follows
    question order, so a report is reproducible from its seeds. A question
    that fails to generate is logged, kept with undefined metrics, and the run
    continues.

    Each non-baseline variant is compared with ``baseline`` on per-question
    EM, F1 and BERTScore (averaged over seeds). Cliff's delta is oriented
    baseline over variant, so a positive value means the baseline wins.
    """
    vs = resolve_variants(variants)
    names = [v.name for v in vs]
    if len(set(names)) != len(names):
        raise ValueError("variant names must be unique")
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    if not questions:
        raise ValueError("empty benchmark")

    def one(args) -> EvalRecord:
        q, v, seed = args
        hits = pipeline.hits_for(q, v, seed)
        try:
            ans = pipeline.answer(q, hits).answer
        except RegionRagError as exc:
            log.warning("question %s (%s, seed %s) failed: %s", q.qid, v.name, seed, exc)
            return EvalRecord(
                q.qid, v.name, seed, q.subdomain, [h.chunk_id for h in hits],
                [h.chunk.text for h in hits], "", {m: None for m in METRICS},
                [f"{q.qid}: generation failed: {exc}"],
            )
        return score_record(q, v, seed, hits, ans, pipeline.encoder, pipeline.judge)

    tasks = [(q, v, s) for v in vs for s in seeds for q in questions]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(one, tasks))
    else:
        records = [one(t) for t in tasks]

    warnings: list[str] = []
    for r in records:
        for w in r.warnings:
            if w not in warnings:
                warnings.append(w)
    for w in warnings:
        log.warning(w)

    per_seed: dict[str, dict[int, dict[str, float | None]]] = {}
    means: dict[str, dict[str, float | None]] = {}
    counts: dict[str, dict[str, int]] = {}
    subdomains: dict[str, dict[str, dict[str, float | None]]] = {}
    per_question: dict[str, dict[str, dict[str, float | None]]] = {}
    for v in names:
        vrec = [r for r in records if r.variant == v]
        per_seed[v] = {
            s: {m: _mean(r.metrics[m] for r in vrec if r.seed == s) for m in METRICS} for s in seeds
        }
        means[v] = {}
        for m in METRICS:
            seed_means = [per_seed[v][s][m] for s in seeds]
            means[v][m] = None if any(x is None for x in seed_means) else float(np.mean(seed_means))
        counts[v] = {
            m: sum(1 for r in vrec if r.seed == seeds[0] and r.metrics[m] is not None) for m in METRICS
        }
        subdomains[v] = {}
        for sd in sorted({r.subdomain for r in vrec}):
            subdomains[v][sd] = {m: _mean(r.metrics[m] for r in vrec if r.subdomain == sd) for m in METRICS}
        per_question[v] = {
            q.qid: {m: _mean(r.metrics[m] for r in vrec if r.qid == q.qid) for m in METRICS}
            for q in questions
        }

    significance: dict[str, dict[str, dict[str, float]]] = {}
    if baseline in names:
        for v in names:
            if v == baseline:
                continue
            significance[v] = {}
            for m in SIGNIFICANCE_METRICS:
                pairs = [
                    (per_question[baseline][q.qid][m], per_question[v][q.qid][m]) for q in questions
                ]
                pairs = [(a, b) for a, b in pairs if a is not None and b is not None]
                if len(pairs) < 2:
                    continue
                a, b = zip(*pairs)
                significance[v][m] = {
                    "p_value": paired_bootstrap(a, b, resamples, seed=seeds[0]),
                    "cliffs_delta": cliffs_delta(a, b),
                }

    return MetricReport(
        names, seeds, baseline, per_seed, means, counts, subdomains, significance, warnings, records
    )


@dataclass
class DomainSimilarity:
    labels: list[str]
    matrix: np.ndarray

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["answers\\passages"] + self.labels)
            for label, row in zip(self.labels, self.matrix):
                w.writerow([label] + ["" if math.isnan(x) else repr(float(x)) for x in row])


def domain_similarity_matrix(
    records: Sequence[EvalRecord],
    encoder: SentenceEncoder,
    subdomains: Sequence[str] | None = None,
) -> DomainSimilarity:
    """Mean cosine between subdomain-i answers and the subdomain-j passage centroid.

    The centroid of a subdomain is the mean unit embedding of every passage
    retrieved for its questions. Rows or columns with no answers or passages
    are NaN.
    """
    labels = list(subdomains) if subdomains is not None else sorted({r.subdomain for r in records})
    k = len(labels)
    answers: dict[str, np.ndarray] = {}
    centroids: dict[str, np.ndarray] = {}
    for sd in labels:
        recs = [r for r in records if r.subdomain == sd]
        ans = [r.answer for r in recs if r.answer.strip()]
        if ans:
            answers[sd] = unit_rows(encoder.encode(ans))
        passages = [t for r in recs for t in r.retrieved_texts]
        if passages:
            centroids[sd] = unit_rows(encoder.encode(passages)).mean(axis=0)
    mat = np.full((k, k), np.nan)
    for i, si in enumerate(labels):
        if si not in answers:
            continue
        for j, sj in enumerate(labels):
            if sj not in centroids:
                continue
            c = centroids[sj]
            n = np.linalg.norm(c)
            mat[i, j] = float((answers[si] @ (c / n)).mean()) if n > 0 else 0.0
    return DomainSimilarity(labels, mat)
