"""Command-line entry point: ``ingest``, ``reindex``, ``ask``, ``eval`` and ``ablate``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 transport error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path

from regionrag.answer import assemble_prompt, generate
from regionrag.config import AppConfig, load_config
from regionrag.corpus import load_corpus
from regionrag.errors import RegionRagError, TransportError
from regionrag.evalkit.benchmark import (
    ABLATION_GRID,
    Pipeline,
    domain_similarity_matrix,
    load_benchmark,
    run_benchmark,
)
from regionrag.evalkit.semantic import EmbeddingJudge, HashEncoder
from regionrag.geo import GeoPoint, UserLocation
from regionrag.index import VectorStore
from regionrag.rank import retrieve

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRANSPORT = 0, 1, 2, 3

log = logging.getLogger("regionrag")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_list(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in _csv_list(s)]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    """Flags default to ``None`` and fall back to the config (whose defaults are ``AppConfig()``)."""
    d = AppConfig()
    p = _Parser(prog="regionrag", description="Region-aware retrieval-augmented answering.")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def paths(sp, corpus=True):
        if corpus:
            sp.add_argument("--corpus", help=f"corpus JSONL (default {d.corpus_path})")
        sp.add_argument("--index", help=f"index file (default {d.index_path})")

    sp = sub.add_parser("ingest", help="chunk, embed and index a corpus")
    paths(sp)
    sp.add_argument("--jobs", type=int, help="parallel embedding requests")

    sp = sub.add_parser("reindex", help="re-embed only documents that changed")
    paths(sp)
    sp.add_argument("--watch", type=float, metavar="SECONDS", help="poll the corpus at this interval")
    sp.add_argument("--polls", type=int, help="stop after this many polls (with --watch)")

    sp = sub.add_parser("ask", help="answer a question from the index")
    sp.add_argument("question")
    paths(sp, corpus=False)
    sp.add_argument("--lat", type=float)
    sp.add_argument("--lon", type=float)
    sp.add_argument("--region", action="append", default=None, help="region code, repeatable")
    sp.add_argument("--alpha", type=float, help=f"locality weight (default {d.fusion.alpha})")
    sp.add_argument("--k", type=int, help=f"passages to keep (default {d.fusion.top_k})")
    sp.add_argument("--expansion", type=int, help=f"candidate pool factor (default {d.fusion.expansion_factor})")
    sp.add_argument("--region-name", help=f"region named in the prompt (default {d.generation.region_name})")
    sp.add_argument("--offline", action="store_true", help="use the extractive offline generator")
    sp.add_argument("--show-prompt", action="store_true")

    for name, helptext in (("eval", "run a benchmark"), ("ablate", "run the ablation grid")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("benchmark")
        paths(sp, corpus=False)
        if name == "eval":
            sp.add_argument("--variants", type=_csv_list, help="comma-separated (default full)")
        sp.add_argument("--seeds", type=_int_list, help=f"comma-separated (default {','.join(map(str, d.eval.seeds))})")
        sp.add_argument("--resamples", type=int, help=f"bootstrap resamples (default {d.eval.resamples})")
        sp.add_argument("--out", default=None, help="output directory (default: next to the benchmark)")
        sp.add_argument("--offline", action="store_true")
        sp.add_argument("--jobs", type=int, help="questions evaluated concurrently")
    return p


def effective_config(args: argparse.Namespace) -> AppConfig:
    cfg = load_config(args.config)
    top = {}
    if getattr(args, "corpus", None):
        top["corpus_path"] = args.corpus
    if getattr(args, "index", None):
        top["index_path"] = args.index
    fusion = {}
    for flag, key in (("alpha", "alpha"), ("k", "top_k"), ("expansion", "expansion_factor")):
        if getattr(args, flag, None) is not None:
            fusion[key] = getattr(args, flag)
    if fusion:
        top["fusion"] = dataclasses.replace(cfg.fusion, **fusion)
    if getattr(args, "region_name", None):
        top["generation"] = dataclasses.replace(cfg.generation, region_name=args.region_name)
    ev = {}
    if getattr(args, "seeds", None):
        ev["seeds"] = tuple(args.seeds)
    if getattr(args, "resamples", None) is not None:
        ev["resamples"] = args.resamples
    if ev:
        top["eval"] = dataclasses.replace(cfg.eval, **ev)
    return dataclasses.replace(cfg, **top)


def _load_store(cfg: AppConfig) -> VectorStore:
    path = Path(cfg.index_path)
    if not path.exists():
        raise FileNotFoundError(f"index not found at {path}; run 'regionrag ingest' first")
    return VectorStore.load(path)


def _sync(cfg: AppConfig, store: VectorStore | None, provider, out) -> VectorStore:
    docs = load_corpus(cfg.corpus_path)
    if not docs:
        raise ValueError(f"empty corpus: {cfg.corpus_path}")
    if store is None:
        store = VectorStore(provider.dim, provider.provider_id, ef_search=cfg.index.ef_search)
    counts = store.sync_documents(docs, provider, cfg.chunking.chunk_size, cfg.chunking.overlap)
    if store.hnsw_params is None and len(store):
        store.build_hnsw(cfg.index.m, cfg.index.ef_construction, cfg.index.seed)
    store.persist(cfg.index_path)
    print(f"{len(docs)} documents, {len(store)} chunks, {len(store)} vectors", file=out)
    print(f"{counts.added} added, {counts.updated} updated, {counts.removed} removed", file=out)
    return store


def cmd_ingest(args, cfg: AppConfig, out) -> int:
    provider = cfg.provider.build(max_parallel=args.jobs)
    store = VectorStore.load(cfg.index_path) if Path(cfg.index_path).exists() else None
    _sync(cfg, store, provider, out)
    return EXIT_OK


def cmd_reindex(args, cfg: AppConfig, out) -> int:
    provider = cfg.provider.build()
    store = _load_store(cfg)
    if args.watch is None:
        _sync(cfg, store, provider, out)
        return EXIT_OK
    last = None
    polls = 0
    while args.polls is None or polls < args.polls:
        mtime = Path(cfg.corpus_path).stat().st_mtime_ns
        if mtime != last:
            store = _sync(cfg, store, provider, out)
            last = mtime
        polls += 1
        if args.polls is None or polls < args.polls:
            time.sleep(args.watch)
    return EXIT_OK


def cmd_ask(args, cfg: AppConfig, out) -> int:
    if (args.lat is None) != (args.lon is None):
        raise UsageError("--lat and --lon must be given together")
    point = GeoPoint(args.lat, args.lon) if args.lat is not None else None
    regions = tuple(r for item in (args.region or []) for r in item.split(",") if r.strip())
    user = UserLocation(point, regions)
    store = _load_store(cfg)
    provider = cfg.provider.build()
    hits = retrieve(store, args.question, user, provider, cfg.fusion)
    bundle = assemble_prompt(args.question, hits, cfg.generation)
    record = generate(cfg.chat.build(args.offline), bundle, cfg.generation)

    print(f"Evidence (alpha={cfg.fusion.alpha}, k={cfg.fusion.top_k}):", file=out)
    if not hits:
        print("  (none)", file=out)
    for h in hits:
        print(
            f"  [{h.rank}] {h.chunk_id}  s_semantic={h.s_semantic:.6f} "
            f"s_distance={h.s_distance:.6f} s_final={h.s_final:.6f}",
            file=out,
        )
    if args.show_prompt:
        print("Prompt:", file=out)
        print(bundle.rendered, file=out)
    print("Answer:", file=out)
    print(record.text, file=out)
    if record.citations:
        print("Cited passages:", file=out)
        for label in record.citations:
            if 1 <= label <= len(hits):
                print(f"  [{label}] {hits[label - 1].chunk_id}", file=out)
    return EXIT_OK


def cmd_eval(args, cfg: AppConfig, out, variants) -> int:
    questions = load_benchmark(args.benchmark)
    store = _load_store(cfg)
    provider = cfg.provider.build()
    encoder = HashEncoder(cfg.eval.encoder_dim)
    pipeline = Pipeline(
        store,
        provider,
        cfg.chat.build(args.offline),
        cfg.fusion,
        cfg.generation,
        encoder,
        EmbeddingJudge(encoder, cfg.eval.tau),
    )
    report = run_benchmark(
        questions, pipeline, variants, cfg.eval.seeds, resamples=cfg.eval.resamples, jobs=args.jobs or 1
    )
    out_dir = Path(args.out) if args.out else Path(args.benchmark).with_suffix("").parent
    out_dir.mkdir(parents=True, exist_ok=True)
    report.to_json(out_dir / "report.json")
    report.to_csv(out_dir / "report.csv")
    report.subdomain_csv(out_dir / "subdomains.csv")
    base = report.baseline if report.baseline in report.variants else report.variants[0]
    domain_similarity_matrix(report.records_for(base), encoder).to_csv(out_dir / "domain_similarity.csv")
    print(f"seeds: {','.join(map(str, report.seeds))}", file=out)
    for row in report.rows():
        mean = "n/a" if row["mean"] is None else f"{row['mean']:.4f}"
        print(f"{row['variant']:<10} {row['metric']:<18} {mean}", file=out)
    print(f"reports written to {out_dir}", file=out)
    return EXIT_OK


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        cfg = effective_config(args)
        if args.command == "ingest":
            return cmd_ingest(args, cfg, out)
        if args.command == "reindex":
            return cmd_reindex(args, cfg, out)
        if args.command == "ask":
            return cmd_ask(args, cfg, out)
        if args.command == "eval":
            return cmd_eval(args, cfg, out, args.variants or ["full"])
        if args.command == "ablate":
            return cmd_eval(args, cfg, out, list(ABLATION_GRID))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (RegionRagError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
