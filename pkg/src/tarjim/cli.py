"""``tarjim`` command line: filter / compose / score / bench / validate /
contamination.

Configuration precedence: built-in defaults < ``--config`` JSON file <
``TARJIM_*`` environment variables < command-line flags. Every run dumps its
effective configuration next to its primary output so results are
reproducible. Diagnostics go to stderr; primary outputs are files.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click

from . import __version__
from .benchkit import (
    contamination_scan,
    domain_distribution,
    domain_distribution_csv,
    validate_benchmark,
)
from .benchrunner import (
    EXAMPLE_TEMPLATES,
    load_profiles,
    run_benchmark,
    score_and_report,
    write_report_files,
)
from .comet_client import CometBatch, CometTriple, comet_score_remote
from .composer import (
    ComposerConfig,
    Direction,
    PackReport,
    compose_finetune,
    pack_pretrain,
    render_segments,
)
from .corpus_io import read_benchmark, read_pairs, write_pairs
from .errors import ConfigError, CorpusError, TarjimError
from .filters import FilterConfig, run_pipeline
from .metrics import MetricConfig, corpus_bleu, corpus_chrf_pp
from .tokenizer import ByteTokenizer

log = logging.getLogger("tarjim")


def _dump_effective_config(primary_out: Path, command: str, params: dict) -> None:
    """Reproducibility dump next to the primary output."""
    if primary_out.suffix:
        path = primary_out.with_name(primary_out.name + ".config.json")
    else:
        primary_out.mkdir(parents=True, exist_ok=True)
        path = primary_out / "effective_config.json"
    payload = {"command": command, "version": __version__, "params": params}
    path.write_text(
        json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f]


def _parse_ratio(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(":")
        weights = float(a), float(b)
    except ValueError as exc:
        raise ConfigError(f"bad ratio {text!r}, expected like 2:1") from exc
    if weights[0] <= 0 or weights[1] <= 0:
        raise ConfigError("ratio weights must be positive")
    return weights


def _parse_band(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad band {text!r}, expected like 50:100") from exc
    if lo < 1 or hi < lo:
        raise ConfigError("band must satisfy 1 <= low <= high")
    return lo, hi


@click.group(name="tarjim")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config file merged under flag defaults.")
@click.option("--log-level", default="INFO", show_default=True)
@click.option("--workers", type=int, default=os.cpu_count() or 1,
              help="Worker count for data-parallel stages.")
@click.version_option(__version__)
@click.pass_context
def cli(ctx: click.Context, config_path: str | None, log_level: str, workers: int) -> None:
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, log_level.upper(), logging.INFO),
        format="level=%(levelname)s module=%(name)s msg=%(message)s",
    )
    logging.getLogger("httpx").setLevel(logging.WARNING)  # per-request noise
    ctx.obj = {"workers": max(1, workers)}
    if config_path:
        with open(config_path, encoding="utf-8") as f:
            ctx.default_map = json.load(f)


@cli.command("filter")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--report", "report_path", required=True, type=click.Path(dir_okay=False))
@click.option("--min-tokens", type=int, default=3, show_default=True)
@click.option("--max-ratio", type=float, default=3.0, show_default=True)
@click.option("--ratio-floor", type=int, default=30, show_default=True)
@click.option("--ar-frac", type=float, default=0.8, show_default=True)
@click.option("--en-frac", type=float, default=0.8, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["jsonl", "tsv"]), default="jsonl",
              show_default=True, help="Input and output corpus format.")
@click.pass_context
def filter_cmd(ctx, in_path, out_path, report_path, min_tokens, max_ratio,
               ratio_floor, ar_frac, en_frac, fmt) -> None:
    """Clean a parallel corpus with the four-stage rule pipeline."""
    cfg = FilterConfig(
        min_tokens=min_tokens,
        arabic_letter_fraction_min=ar_frac,
        latin_letter_fraction_min=en_frac,
        max_char_ratio=max_ratio,
        ratio_min_chars=ratio_floor,
    )
    stream, report = run_pipeline(
        read_pairs(in_path, format=fmt), cfg, workers=ctx.obj["workers"]
    )
    written = write_pairs(stream, out_path, format=fmt)
    Path(report_path).write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    _dump_effective_config(Path(out_path), "filter", {
        "in": in_path, "out": out_path, "report": report_path, "format": fmt,
        "min_tokens": min_tokens, "max_ratio": max_ratio, "ratio_floor": ratio_floor,
        "ar_frac": ar_frac, "en_frac": en_frac, "workers": ctx.obj["workers"],
    })
    log.info("filter kept %d of %d pairs", written, report.input_count)


@cli.group("compose")
def compose_group() -> None:
    """Produce training-data streams from a clean corpus."""


@compose_group.command("pretrain")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--context", type=int, default=2048, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
def compose_pretrain(in_path, out_path, context, seed) -> None:
    """Pack tagged pair text into fixed-length next-token sequences."""
    cfg = ComposerConfig(pretrain_context=context, seed=seed)
    tokenizer = ByteTokenizer()
    report = PackReport()
    with open(out_path, "w", encoding="utf-8") as f:
        for seq in pack_pretrain(read_pairs(in_path), tokenizer, cfg, report):
            f.write(json.dumps({
                "pair_ids": seq.pair_ids,
                "text": tokenizer.decode(seq.token_ids),
                "token_ids": seq.token_ids,
                "loss_mask": seq.loss_mask,
            }, ensure_ascii=False) + "\n")
    Path(out_path + ".report.json").write_text(
        json.dumps(report.__dict__, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _dump_effective_config(Path(out_path), "compose pretrain", {
        "in": in_path, "out": out_path, "context": context, "seed": seed,
    })
    log.info("packed %d pairs into %d sequences (%d dropped oversize)",
             report.packed_pairs, report.sequences, report.dropped_overlength)


@compose_group.command("finetune")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--mode", type=click.Choice(["bi", "ar2en", "en2ar"]), default="bi",
              show_default=True)
@click.option("--ratio", default="2:1", show_default=True,
              help="Arabic-source:English-source weight for bidirectional mode.")
@click.option("--short-frac", type=float, default=0.15, show_default=True)
@click.option("--context", type=int, default=512, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
def compose_finetune_cmd(in_path, out_path, mode, ratio, short_frac, context, seed) -> None:
    """Emit masked, direction-sampled fine-tuning samples."""
    ar_w, en_w = _parse_ratio(ratio)
    cfg = ComposerConfig(
        mode={"bi": "bidirectional", "ar2en": "ar2en_only", "en2ar": "en2ar_only"}[mode],
        ar_source_weight=ar_w,
        en_source_weight=en_w,
        short_fraction=short_frac,
        finetune_context=context,
        seed=seed,
    )
    tokenizer = ByteTokenizer()
    samples, report = compose_finetune(read_pairs(in_path), tokenizer, cfg)
    with open(out_path, "w", encoding="utf-8") as f:
        for sample in samples:
            f.write(json.dumps({
                "pair_ids": [sample.pair_id],
                "text": render_segments(sample.segments),
                "token_ids": sample.token_ids,
                "loss_mask": sample.loss_mask,
            }, ensure_ascii=False) + "\n")
    Path(out_path + ".report.json").write_text(
        json.dumps({
            "emitted": report.emitted,
            "direction_counts": report.direction_counts,
            "short_count": report.short_count,
            "short_fraction": report.short_fraction,
            "short_supply_exhausted": report.short_supply_exhausted,
            "dropped_overlength": report.dropped_overlength,
        }, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    _dump_effective_config(Path(out_path), "compose finetune", {
        "in": in_path, "out": out_path, "mode": mode, "ratio": ratio,
        "short_frac": short_frac, "context": context, "seed": seed,
    })
    log.info("composed %d samples (%d dropped oversize)", report.emitted,
             report.dropped_overlength)


@cli.command("score")
@click.option("--hyp", "hyp_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--ref", "ref_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--src", "src_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--comet-endpoint", default=None)
@click.option("--json", "json_path", required=True, type=click.Path(dir_okay=False))
@click.option("--lowercase", is_flag=True, default=False)
def score_cmd(hyp_path, ref_path, src_path, comet_endpoint, json_path, lowercase) -> None:
    """Score line-aligned hypothesis/reference text files."""
    hyps = _read_lines(hyp_path)
    refs = _read_lines(ref_path)
    if len(hyps) != len(refs):
        raise ConfigError(f"line count mismatch: hyp has {len(hyps)}, ref has {len(refs)}")
    cfg = MetricConfig(lowercase=lowercase)
    out = {
        "bleu": corpus_bleu(hyps, refs, cfg).to_dict(),
        "chrf_pp": corpus_chrf_pp(hyps, refs, cfg).to_dict(),
        "metric_fingerprint": cfg.fingerprint(),
    }
    if comet_endpoint:
        if not src_path:
            raise ConfigError("--src is required for COMET scoring")
        srcs = _read_lines(src_path)
        if len(srcs) != len(hyps):
            raise ConfigError(f"line count mismatch: src has {len(srcs)}, hyp has {len(hyps)}")
        result = comet_score_remote(CometBatch(
            triples=[CometTriple(src=s, mt=h, ref=r) for s, h, r in zip(srcs, hyps, refs)],
            endpoint=comet_endpoint,
        ))
        out["comet"] = result.to_dict()
    Path(json_path).write_text(
        json.dumps(out, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    _dump_effective_config(Path(json_path), "score", {
        "hyp": hyp_path, "ref": ref_path, "src": src_path,
        "comet_endpoint": comet_endpoint, "json": json_path, "lowercase": lowercase,
    })
    log.info("bleu=%.2f chrf_pp=%.2f", out["bleu"]["score"], out["chrf_pp"]["score"])


def _parse_directions(text: str) -> list[Direction]:
    try:
        return [Direction(d.strip()) for d in text.split(",") if d.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad directions {text!r}, expected ar2en,en2ar") from exc


@cli.group("bench")
def bench_group() -> None:
    """Run and report endpoint-based benchmark evaluations."""


@bench_group.command("run")
@click.option("--benchmark", "benchmark_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--profiles", "profiles_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--directions", default="ar2en,en2ar", show_default=True)
@click.option("--cache", "cache_dir", required=True, type=click.Path(file_okay=False))
@click.option("--concurrency", type=int, default=8, show_default=True)
def bench_run(benchmark_path, profiles_path, directions, cache_dir, concurrency) -> None:
    """Translate the benchmark through every configured model endpoint."""
    entries = read_benchmark(benchmark_path)
    profiles, templates = load_profiles(profiles_path)
    dirs = _parse_directions(directions)
    records, stats = run_benchmark(profiles, templates, entries, dirs, cache_dir,
                                   concurrency=concurrency)
    manifest = {
        "benchmark": str(benchmark_path),
        "directions": [d.value for d in dirs],
        "models": {p.name: p.size_label for p in profiles},
    }
    Path(cache_dir, "run_manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _dump_effective_config(Path(cache_dir), "bench run", {
        "benchmark": benchmark_path, "profiles": profiles_path,
        "directions": directions, "cache": cache_dir, "concurrency": concurrency,
    })
    for failure in stats.failures:
        log.warning("failed: %s", failure)
    log.info("records=%d requests=%d cache_hits=%d failures=%d",
             len(records), stats.requests, stats.cache_hits, len(stats.failures))


@bench_group.command("report")
@click.option("--cache", "cache_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--benchmark", "benchmark_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--comet-endpoint", default=None)
def bench_report(cache_dir, benchmark_path, out_dir, comet_endpoint) -> None:
    """Score cached run records and render Markdown/CSV/JSON tables."""
    from .benchrunner import RunRecord

    entries = read_benchmark(benchmark_path)
    manifest_path = Path(cache_dir, "run_manifest.json")
    model_sizes: dict[str, str] = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        model_sizes = dict(manifest.get("models", {}))
    records = []
    for path in sorted(Path(cache_dir).glob("*.json")):
        if path.name in ("run_manifest.json", "effective_config.json"):
            continue
        payload = json.loads(path.read_text(encoding="utf-8"))
        records.append(RunRecord(cache_hit=True, **payload))
    if not records:
        raise ConfigError(f"no cached records under {cache_dir}")
    for record in records:
        model_sizes.setdefault(record.model, "")
    report = score_and_report(records, entries, model_sizes,
                              comet_endpoint=comet_endpoint)
    paths = write_report_files(report, out_dir)
    _dump_effective_config(Path(out_dir), "bench report", {
        "cache": cache_dir, "benchmark": benchmark_path, "out": out_dir,
        "comet_endpoint": comet_endpoint,
    })
    log.info("wrote %s", ", ".join(str(p) for p in paths.values()))


@cli.command("validate")
@click.option("--benchmark", "benchmark_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--report", "report_path", required=True, type=click.Path(dir_okay=False))
@click.option("--tolerance", type=int, default=0, show_default=True,
              help="Allowed |ar-origin - en-origin| count difference.")
@click.option("--band", default="50:100", show_default=True,
              help="Origin-side word-count band, low:high.")
def validate_cmd(benchmark_path, report_path, tolerance, band) -> None:
    """Check a benchmark file against its construction constraints."""
    entries = read_benchmark(benchmark_path)
    report = validate_benchmark(entries, tolerance=tolerance, length_band=_parse_band(band))
    Path(report_path).write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    hist, summary = domain_distribution(entries)
    Path(report_path + ".domains.csv").write_text(
        domain_distribution_csv(hist), encoding="utf-8"
    )
    _dump_effective_config(Path(report_path), "validate", {
        "benchmark": benchmark_path, "report": report_path,
        "tolerance": tolerance, "band": band,
    })
    log.info("validated %d entries, flags_clear=%s", report.pair_count, report.flags_clear)
    print(summary, file=sys.stderr)


@cli.command("contamination")
@click.option("--benchmark", "benchmark_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--n", "ngram_order", type=int, default=8, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def contamination_cmd(benchmark_path, corpus_path, ngram_order, out_path) -> None:
    """Scan a corpus for word n-grams shared with benchmark text."""
    entries = read_benchmark(benchmark_path)
    hits = contamination_scan(read_pairs(corpus_path), entries, n=ngram_order)
    with open(out_path, "w", encoding="utf-8") as f:
        for hit in hits:
            f.write(json.dumps(hit.to_dict(), ensure_ascii=False) + "\n")
    _dump_effective_config(Path(out_path), "contamination", {
        "benchmark": benchmark_path, "corpus": corpus_path,
        "n": ngram_order, "out": out_path,
    })
    log.info("found %d contamination hits", len(hits))


@cli.command("init-profiles")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def init_profiles(out_path) -> None:
    """Write a starter profiles/templates config with the example templates."""
    starter = {
        "templates": EXAMPLE_TEMPLATES,
        "models": [
            {
                "name": "my-model",
                "size_label": "1.5B",
                "endpoint": "http://localhost:8000",
                "template": "direct",
                "max_tokens": 512,
                "temperature": 0.0,
            }
        ],
    }
    Path(out_path).write_text(
        json.dumps(starter, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    log.info("wrote starter config to %s", out_path)


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False, auto_envvar_prefix="TARJIM")
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        message = exc.format_message()
        if exc.ctx is not None:
            print(exc.ctx.get_usage(), file=sys.stderr)
        print(f"error={message!r}", file=sys.stderr)
        return 1
    except (ConfigError, CorpusError) as exc:
        print(f"error={str(exc)!r} kind=config", file=sys.stderr)
        return 1
    except TarjimError as exc:
        print(f"error={str(exc)!r} kind=runtime", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error={str(exc)!r} kind=io", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
