import argparse
import io
import json

import pytest

from conftest import three_docs
from regionrag.cli import EXIT_DATA, EXIT_OK, EXIT_TRANSPORT, EXIT_USAGE, build_parser, effective_config, main
from regionrag.config import AppConfig
from regionrag.corpus import Document, chunk_corpus, write_corpus


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


def ingest(d):
    return run("ingest", "--corpus", d / "corpus.jsonl", "--index", d / "index.rgx")


def test_ingest_counts(corpus_dir):
    code, out = ingest(corpus_dir)
    n = len(chunk_corpus(three_docs()))
    assert code == EXIT_OK
    assert f"3 documents, {n} chunks, {n} vectors" in out
    assert f"{n} added, 0 updated, 0 removed" in out
    code, out = ingest(corpus_dir)
    assert "0 added, 0 updated, 0 removed" in out


def test_ingest_empty_corpus(tmp_path, capsys):
    (tmp_path / "corpus.jsonl").write_text("")
    code, _ = ingest(tmp_path)
    assert code == EXIT_DATA
    assert "empty corpus" in capsys.readouterr().err


def test_ingest_bad_line(tmp_path, capsys):
    (tmp_path / "corpus.jsonl").write_text('{"id": "a", "source_type": "journal"}\n')
    assert ingest(tmp_path)[0] == EXIT_DATA
    assert "line 1" in capsys.readouterr().err


def ask(d, *extra):
    return run("ask", *extra, "--index", d / "index.rgx", "--offline")


def test_ask_planted_sentence(planted_dir, planted):
    ingest(planted_dir)
    _, qs = planted
    q = next(q for q in qs if q.region_tags[0].code == "US-NC" and "nitrogen" in q.question)
    code, out = ask(planted_dir, q.question, "--region", "US-NC")
    assert code == EXIT_OK
    answer = out.split("Answer:\n", 1)[1].splitlines()[0]
    assert answer.startswith(q.reference_answer)
    assert "Cited passages:" in out


def test_ask_alpha_changes_top1(corpus_dir):
    ingest(corpus_dir)
    q = "apply lime in spring to raise soil pH"
    _, aware = ask(corpus_dir, q, "--region", "US-NC", "--alpha", "0.5")
    _, sem = ask(corpus_dir, q, "--region", "US-NC", "--alpha", "0")
    top = lambda out: out.splitlines()[1].split()[1]
    assert top(aware) == "nc-lime#0"
    assert top(sem) == "ca-lime#0"


def test_ask_k5_on_three_chunks(tmp_path):
    docs = [Document(f"d{i}", "t", f"lime note number {i}", "journal", 2020) for i in range(3)]
    write_corpus(docs, tmp_path / "corpus.jsonl")
    ingest(tmp_path)
    code, out = ask(tmp_path, "lime", "--k", "5")
    evidence = [l for l in out.splitlines() if l.startswith("  [") and "s_final=" in l]
    assert code == EXIT_OK and len(evidence) == 3


def test_ask_prints_all_scores(corpus_dir):
    ingest(corpus_dir)
    _, out = ask(corpus_dir, "lime", "--lat", "35.8", "--lon", "-78.6")
    line = out.splitlines()[1]
    for key in ("s_semantic=", "s_distance=", "s_final="):
        assert key in line


def test_ask_byte_deterministic(corpus_dir):
    ingest(corpus_dir)
    a = ask(corpus_dir, "When should lime be applied?", "--region", "US-NC")
    b = ask(corpus_dir, "When should lime be applied?", "--region", "US-NC")
    assert a == b


def test_ask_missing_index(tmp_path, capsys):
    code, _ = ask(tmp_path, "x")
    assert code == EXIT_DATA
    err = capsys.readouterr().err
    assert "index not found" in err and "ingest" in err


def test_usage_errors(corpus_dir):
    assert run("bogus")[0] == EXIT_USAGE
    assert run()[0] == EXIT_USAGE
    assert run("ask", "q", "--lat", "35")[0] == EXIT_USAGE
    assert run("ask", "q", "--alpha", "high")[0] == EXIT_USAGE


def test_invalid_alpha_is_data_error(corpus_dir):
    ingest(corpus_dir)
    assert ask(corpus_dir, "q", "--alpha", "2")[0] == EXIT_DATA


def test_transport_error_exit_code(corpus_dir, capsys):
    ingest(corpus_dir)
    cfg = corpus_dir / "cfg.json"
    cfg.write_text(json.dumps({"chat": {"base_url": "http://127.0.0.1:9/v1", "timeout": 2}}))
    code, _ = run("--config", cfg, "ask", "lime", "--index", corpus_dir / "index.rgx")
    assert code == EXIT_TRANSPORT
    assert "transport error" in capsys.readouterr().err


def test_config_file_and_flag_override(corpus_dir):
    cfg = corpus_dir / "cfg.json"
    cfg.write_text(json.dumps({"index_path": str(corpus_dir / "index.rgx"), "corpus_path": str(corpus_dir / "corpus.jsonl"), "fusion": {"top_k": 2}}))
    assert run("--config", cfg, "ingest")[0] == EXIT_OK
    _, out = run("--config", cfg, "ask", "lime", "--offline")
    assert "k=2" in out
    _, out = run("--config", cfg, "ask", "lime", "--offline", "--k", "1")
    assert "k=1" in out


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"fusion": {"beta": 1}}))
    assert run("--config", cfg, "ingest")[0] == EXIT_DATA
    assert "beta" in capsys.readouterr().err


def test_eval_writes_reports(planted_dir):
    ingest(planted_dir)
    out_dir = planted_dir / "out"
    code, out = run(
        "eval", planted_dir / "bench.jsonl", "--index", planted_dir / "index.rgx",
        "--variants", "full,norag,random", "--seeds", "1,2,3", "--offline", "--resamples", "200",
        "--out", out_dir,
    )
    assert code == EXIT_OK
    for name in ("report.json", "report.csv", "subdomains.csv", "domain_similarity.csv"):
        assert (out_dir / name).exists()
    rep = json.loads((out_dir / "report.json").read_text())
    assert rep["seeds"] == [1, 2, 3]
    assert rep["variants"] == ["full", "norag", "random"]
    assert "seeds: 1,2,3" in out


def test_ablate_runs_grid(planted_dir):
    ingest(planted_dir)
    code, _ = run(
        "ablate", planted_dir / "bench.jsonl", "--index", planted_dir / "index.rgx",
        "--seeds", "1", "--offline", "--resamples", "100", "--out", planted_dir / "abl", "--jobs", "2",
    )
    assert code == EXIT_OK
    rep = json.loads((planted_dir / "abl" / "report.json").read_text())
    assert rep["variants"] == ["full", "norag", "topk2", "topk8", "random"]


def test_reindex_picks_up_edit(corpus_dir):
    ingest(corpus_dir)
    docs = three_docs()
    docs[0] = Document(docs[0].id, docs[0].title, "Apply lime in winter instead.", docs[0].source_type, 2024, docs[0].region_tags, docs[0].centroid)
    write_corpus(docs[:2], corpus_dir / "corpus.jsonl")
    code, out = run("reindex", "--corpus", corpus_dir / "corpus.jsonl", "--index", corpus_dir / "index.rgx")
    removed = len(chunk_corpus([three_docs()[2]]))
    assert code == EXIT_OK
    assert f"0 added, 1 updated, {removed} removed" in out


def test_reindex_watch_polls(corpus_dir):
    ingest(corpus_dir)
    code, out = run(
        "reindex", "--corpus", corpus_dir / "corpus.jsonl", "--index", corpus_dir / "index.rgx",
        "--watch", "0.01", "--polls", "2",
    )
    assert code == EXIT_OK
    assert out.count("added") == 1


def _options(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for name, sub in action.choices.items():
                yield from ((name, a) for a in sub._actions if not isinstance(a, argparse._HelpAction))
        elif not isinstance(action, argparse._HelpAction):
            yield "", action


def test_cli_defaults_defer_to_appconfig():
    for cmd, action in _options(build_parser()):
        if action.dest in ("command", "question", "benchmark"):
            continue
        if isinstance(action, argparse._StoreTrueAction):
            assert action.default is False
        else:
            assert action.default is None, f"{cmd} {action.dest} has its own default"
    for argv in (["ingest"], ["reindex"], ["ask", "q"], ["eval", "b.jsonl"], ["ablate", "b.jsonl"]):
        assert effective_config(build_parser().parse_args(argv)) == AppConfig()


def test_cli_help_shows_appconfig_defaults():
    d = AppConfig()
    parser = build_parser()
    helps = {(cmd, a.dest): a.help or "" for cmd, a in _options(parser)}
    assert str(d.fusion.alpha) in helps[("ask", "alpha")]
    assert str(d.fusion.top_k) in helps[("ask", "k")]
    assert d.generation.region_name in helps[("ask", "region_name")]
    assert "1,2,3" in helps[("eval", "seeds")]
    assert str(d.eval.resamples) in helps[("eval", "resamples")]
    assert d.index_path in helps[("ingest", "index")]
