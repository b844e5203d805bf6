"""Evaluation metrics, significance statistics and the benchmark runner."""

from regionrag.evalkit.benchmark import (
    ABLATION_GRID,
    METRICS,
    SUBDOMAINS,
    VARIANTS,
    DomainSimilarity,
    EvalQuestion,
    EvalRecord,
    MetricReport,
    Pipeline,
    Variant,
    domain_similarity_matrix,
    load_benchmark,
    run_benchmark,
    write_benchmark,
)
from regionrag.evalkit.lexical import bleu4, exact_match, rouge_l, token_f1
from regionrag.evalkit.semantic import (
    EmbeddingJudge,
    HashEncoder,
    LLMJudge,
    ProviderEncoder,
    answer_relevance,
    bertscore_f1,
    context_precision,
    context_recall,
    faithfulness,
    ragas_score,
)
from regionrag.evalkit.stats import cliffs_delta, paired_bootstrap
from regionrag.textnorm import normalize_text

__all__ = [
    "ABLATION_GRID",
    "METRICS",
    "SUBDOMAINS",
    "VARIANTS",
    "DomainSimilarity",
    "EmbeddingJudge",
    "EvalQuestion",
    "EvalRecord",
    "HashEncoder",
    "LLMJudge",
    "MetricReport",
    "Pipeline",
    "ProviderEncoder",
    "Variant",
    "answer_relevance",
    "bertscore_f1",
    "bleu4",
    "cliffs_delta",
    "context_precision",
    "context_recall",
    "domain_similarity_matrix",
    "exact_match",
    "faithfulness",
    "load_benchmark",
    "normalize_text",
    "paired_bootstrap",
    "ragas_score",
    "rouge_l",
    "run_benchmark",
    "token_f1",
    "write_benchmark",
]
