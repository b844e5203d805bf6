# # Benchmarking variants with significance tests
#
# The planted benchmark replicates each advisory topic across several
# states with different values. Only the asker's home-state document holds
# the right answer, so locality shows up directly in context recall.

# +
from regionrag import FusionConfig, HashEmbeddingProvider, OfflineStubClient, VectorStore
from regionrag.evalkit import Pipeline, bleu4, cliffs_delta, paired_bootstrap, rouge_l, run_benchmark, token_f1
from regionrag.synthetic import planted_benchmark

docs, questions = planted_benchmark(n_questions=48, seed=0)
provider = HashEmbeddingProvider(512)
store = VectorStore(provider.dim, provider.provider_id)
store.sync_documents(docs, provider)
store.build_hnsw(seed=0)
pipeline = Pipeline(store, provider, OfflineStubClient(), FusionConfig(alpha=0.5))
print(len(docs), "documents,", len(questions), "questions")
# -

# Lexical metrics on a single pair.

pred, ref = "Apply 120 pounds of nitrogen per acre.", "Apply 120 pounds of nitrogen per acre to corn."
print(f"F1 {token_f1(pred, ref):.3f}  BLEU-4 {bleu4(pred, ref):.3f}  ROUGE-L {rouge_l(pred, ref):.3f}")

# Run four variants over three seeds. Answer F1 of each variant is tested
# against "full" with a paired bootstrap.

# +
report = run_benchmark(questions, pipeline, ["full", "semantic", "random", "norag"], seeds=(1, 2, 3), resamples=2000)
for v in report.variants:
    m = report.means[v]
    sig = report.significance.get(v, {}).get("f1", {})
    cr = "n/a" if m["context_recall"] is None else f"{m['context_recall']:.3f}"
    print(f"{v:<9} context_recall={cr:<6} f1={m['f1']:.3f}  f1 p={sig.get('p_value', float('nan')):.4f}")
# -

# The statistics are also usable on their own. A positive Cliff's delta
# means the first sample tends to be larger.

a, b = [1.0] * 20, [0.0] * 20
print("p =", paired_bootstrap(a, b, 5000), " delta =", cliffs_delta(a, b))
