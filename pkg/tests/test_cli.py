from __future__ import annotations

import json

import pytest

from tarjim.cli import main
from tarjim.corpus_io import read_pairs, write_pairs
from tarjim.records import Origin, ParallelPair

from _synth import make_clean_corpus


@pytest.fixture()
def corpus_file(tmp_path):
    pairs = make_clean_corpus(seed=80, n=50)
    noisy = pairs + [
        ParallelPair(id="bad-short", ar="قصير هنا", en="short one here", origin=Origin.ARABIC),
        ParallelPair(id="bad-dup", ar=pairs[0].ar, en=pairs[0].en, origin=pairs[0].origin),
    ]
    path = tmp_path / "pairs.jsonl"
    write_pairs(noisy, path)
    return path


def test_filter_end_to_end(tmp_path, corpus_file):
    out = tmp_path / "clean.jsonl"
    report = tmp_path / "report.json"
    code = main(["filter", "--in", str(corpus_file), "--out", str(out),
                 "--report", str(report)])
    assert code == 0
    cleaned = list(read_pairs(out))
    assert len(cleaned) == 50
    rep = json.loads(report.read_text())
    assert rep["input_count"] == 52
    assert rep["accepted_count"] == 50
    assert rep["rejected"]["min_tokens"] == 1
    assert rep["rejected"]["duplicate"] == 1
    # effective config dumped next to the output
    cfg = json.loads((tmp_path / "clean.jsonl.config.json").read_text())
    assert cfg["command"] == "filter"
    assert cfg["params"]["min_tokens"] == 3


def test_filter_env_var_overrides_default(tmp_path, corpus_file, monkeypatch):
    monkeypatch.setenv("TARJIM_FILTER_MIN_TOKENS", "4")
    out = tmp_path / "clean.jsonl"
    code = main(["filter", "--in", str(corpus_file), "--out", str(out),
                 "--report", str(tmp_path / "r.json")])
    assert code == 0
    cfg = json.loads((tmp_path / "clean.jsonl.config.json").read_text())
    assert cfg["params"]["min_tokens"] == 4


def test_config_file_layering(tmp_path, corpus_file, monkeypatch):
    config = tmp_path / "tarjim.json"
    config.write_text(json.dumps({"filter": {"min_tokens": 5}}))
    out = tmp_path / "clean.jsonl"
    code = main(["--config", str(config), "filter", "--in", str(corpus_file),
                 "--out", str(out), "--report", str(tmp_path / "r.json")])
    assert code == 0
    assert json.loads((tmp_path / "clean.jsonl.config.json").read_text())["params"]["min_tokens"] == 5
    # env beats config file
    monkeypatch.setenv("TARJIM_FILTER_MIN_TOKENS", "6")
    code = main(["--config", str(config), "filter", "--in", str(corpus_file),
                 "--out", str(out), "--report", str(tmp_path / "r.json")])
    assert code == 0
    assert json.loads((tmp_path / "clean.jsonl.config.json").read_text())["params"]["min_tokens"] == 6
    # flag beats env
    code = main(["--config", str(config), "filter", "--in", str(corpus_file),
                 "--out", str(out), "--report", str(tmp_path / "r.json"),
                 "--min-tokens", "7"])
    assert code == 0
    assert json.loads((tmp_path / "clean.jsonl.config.json").read_text())["params"]["min_tokens"] == 7


def test_filter_idempotent_at_filesystem_level(tmp_path, corpus_file):
    out1 = tmp_path / "c1.jsonl"
    out2 = tmp_path / "c2.jsonl"
    main(["filter", "--in", str(corpus_file), "--out", str(out1),
          "--report", str(tmp_path / "r1.json")])
    main(["filter", "--in", str(corpus_file), "--out", str(out2),
          "--report", str(tmp_path / "r2.json")])
    assert out1.read_bytes() == out2.read_bytes()
    assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()


def test_unknown_flag_exits_1(tmp_path):
    assert main(["filter", "--nonsense"]) == 1


def test_unknown_subcommand_exits_1():
    assert main(["frobnicate"]) == 1


def test_no_subcommand_prints_usage(capsys):
    code = main([])
    assert code in (0, 1)  # click prints help for bare group invocation


def test_score_command(tmp_path):
    hyp = tmp_path / "hyp.txt"
    ref = tmp_path / "ref.txt"
    hyp.write_text("hello world today\nمرحبا بالعالم\n", encoding="utf-8")
    ref.write_text("hello world today\nمرحبا بالعالم\n", encoding="utf-8")
    out = tmp_path / "scores.json"
    code = main(["score", "--hyp", str(hyp), "--ref", str(ref), "--json", str(out)])
    assert code == 0
    scores = json.loads(out.read_text())
    assert scores["chrf_pp"]["score"] == pytest.approx(100.0)
    assert "comet" not in scores


def test_score_line_mismatch_exits_1(tmp_path, capsys):
    hyp = tmp_path / "hyp.txt"
    ref = tmp_path / "ref.txt"
    hyp.write_text("one line\n", encoding="utf-8")
    ref.write_text("one line\nand two\n", encoding="utf-8")
    code = main(["score", "--hyp", str(hyp), "--ref", str(ref),
                 "--json", str(tmp_path / "s.json")])
    assert code == 1
    assert "mismatch" in capsys.readouterr().err


def test_compose_pipeline(tmp_path, corpus_file):
    clean = tmp_path / "clean.jsonl"
    main(["filter", "--in", str(corpus_file), "--out", str(clean),
          "--report", str(tmp_path / "r.json")])

    stream = tmp_path / "stream.jsonl"
    code = main(["compose", "pretrain", "--in", str(clean), "--out", str(stream),
                 "--context", "2048", "--seed", "7"])
    assert code == 0
    rows = [json.loads(line) for line in stream.read_text(encoding="utf-8").splitlines()]
    assert rows
    for row in rows:
        assert len(row["token_ids"]) <= 2048
        assert row["loss_mask"] == [1] * len(row["token_ids"])

    samples = tmp_path / "samples.jsonl"
    code = main(["compose", "finetune", "--in", str(clean), "--out", str(samples),
                 "--mode", "bi", "--ratio", "2:1", "--short-frac", "0.15",
                 "--context", "2048", "--seed", "7"])
    assert code == 0
    rows = [json.loads(line) for line in samples.read_text(encoding="utf-8").splitlines()]
    assert rows
    for row in rows:
        assert set(row["loss_mask"]) <= {0, 1}
        assert len(row["token_ids"]) == len(row["loss_mask"])
        assert len(row["pair_ids"]) == 1
    report = json.loads((str(samples) + ".report.json") and (tmp_path / "samples.jsonl.report.json").read_text())
    assert report["emitted"] == len(rows)


def test_compose_determinism(tmp_path, corpus_file):
    clean = tmp_path / "clean.jsonl"
    main(["filter", "--in", str(corpus_file), "--out", str(clean),
          "--report", str(tmp_path / "r.json")])
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    for out in (a, b):
        code = main(["compose", "finetune", "--in", str(clean), "--out", str(out),
                     "--seed", "7", "--context", "4096"])
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_validate_and_contamination_commands(tmp_path):
    from _synth import make_benchmark

    bench = tmp_path / "bench.jsonl"
    write_pairs(make_benchmark(seed=81, n=20), bench)
    report = tmp_path / "validation.json"
    code = main(["validate", "--benchmark", str(bench), "--report", str(report)])
    assert code == 0
    rep = json.loads(report.read_text())
    assert rep["pair_count"] == 20
    assert (tmp_path / "validation.json.domains.csv").exists()

    corpus = tmp_path / "corpus.jsonl"
    write_pairs(make_clean_corpus(seed=82, n=30), corpus)
    hits = tmp_path / "hits.jsonl"
    code = main(["contamination", "--benchmark", str(bench), "--corpus", str(corpus),
                 "--n", "8", "--out", str(hits)])
    assert code == 0
    assert hits.read_text(encoding="utf-8") == ""  # disjoint content


def test_missing_input_exits_1(tmp_path):
    code = main(["filter", "--in", str(tmp_path / "nope.jsonl"),
                 "--out", str(tmp_path / "o.jsonl"), "--report", str(tmp_path / "r.json")])
    assert code == 1
