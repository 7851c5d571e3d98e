"""Benchmark construction checks: origin balance, length bands, duplicates,
domain coverage, and word-n-gram contamination against a training corpus.

The contamination scan indexes 64-bit hashes of every benchmark-side word
n-gram (normalized; English case-folded, Arabic untouched), streams the
corpus once, and re-verifies every hash candidate by exact string comparison
before reporting, so hash collisions can never produce a false positive.
"""

from __future__ import annotations

import hashlib
from collections.abc import Iterable
from dataclasses import dataclass, field

from .filters import normalize_text
from .records import BenchmarkEntry, ParallelPair

# Benchmark domain vocabulary used for informational off-list reporting.
KNOWN_DOMAINS = frozenset(
    {"cultural", "general", "healthcare", "legal", "religious", "scientific", "technical"}
)

DEFAULT_LENGTH_BAND = (50, 100)
VIOLATOR_CAP = 50


@dataclass
class ValidationReport:
    pair_count: int = 0
    origin_counts: dict[str, int] = field(default_factory=dict)
    origin_delta: int = 0
    origin_balance_flag: bool = False
    length_band: tuple[int, int] = DEFAULT_LENGTH_BAND
    band_compliant: int = 0
    band_violators: list[str] = field(default_factory=list)  # entry ids, capped
    band_violator_count: int = 0
    translation_side_in_band: int = 0  # reported, never flagged
    duplicate_ids: list[str] = field(default_factory=list)
    duplicate_texts: list[str] = field(default_factory=list)
    domain_histogram: dict[str, int] = field(default_factory=dict)
    off_list_domains: list[str] = field(default_factory=list)

    @property
    def flags_clear(self) -> bool:
        return not (
            self.origin_balance_flag
            or self.band_violator_count
            or self.duplicate_ids
            or self.duplicate_texts
        )

    def to_dict(self) -> dict:
        return {
            "pair_count": self.pair_count,
            "origin_counts": dict(sorted(self.origin_counts.items())),
            "origin_delta": self.origin_delta,
            "origin_balance_flag": self.origin_balance_flag,
            "length_band": list(self.length_band),
            "band_compliant": self.band_compliant,
            "band_violator_count": self.band_violator_count,
            "band_violators": list(self.band_violators),
            "translation_side_in_band": self.translation_side_in_band,
            "duplicate_ids": list(self.duplicate_ids),
            "duplicate_texts": list(self.duplicate_texts),
            "domain_histogram": dict(sorted(self.domain_histogram.items())),
            "off_list_domains": sorted(self.off_list_domains),
            "flags_clear": self.flags_clear,
        }


def validate_benchmark(
    entries: Iterable[BenchmarkEntry | ParallelPair],
    tolerance: int = 0,
    length_band: tuple[int, int] = DEFAULT_LENGTH_BAND,
) -> ValidationReport:
    """Check construction constraints; reports, never mutates.

    The word-count band applies to the origin side only (the authored text);
    the translation side's band membership is reported informationally.
    """
    report = ValidationReport(length_band=length_band)
    lo, hi = length_band
    seen_ids: set[str] = set()
    seen_texts: set[tuple[str, str]] = set()
    for entry in entries:
        report.pair_count += 1
        okey = entry.origin.value
        report.origin_counts[okey] = report.origin_counts.get(okey, 0) + 1

        origin_text = entry.side(entry.origin.value)
        other = "en" if entry.origin.value == "ar" else "ar"
        translated_text = entry.side(other)
        n_origin = len(origin_text.split())
        if lo <= n_origin <= hi:
            report.band_compliant += 1
        else:
            report.band_violator_count += 1
            if len(report.band_violators) < VIOLATOR_CAP:
                report.band_violators.append(entry.id)
        if lo <= len(translated_text.split()) <= hi:
            report.translation_side_in_band += 1

        if entry.id in seen_ids:
            if len(report.duplicate_ids) < VIOLATOR_CAP:
                report.duplicate_ids.append(entry.id)
        else:
            seen_ids.add(entry.id)
        text_key = (normalize_text(entry.ar), normalize_text(entry.en))
        if text_key in seen_texts:
            if len(report.duplicate_texts) < VIOLATOR_CAP:
                report.duplicate_texts.append(entry.id)
        else:
            seen_texts.add(text_key)

        dkey = entry.domain if entry.domain is not None else "unlabeled"
        report.domain_histogram[dkey] = report.domain_histogram.get(dkey, 0) + 1

    ar = report.origin_counts.get("ar", 0)
    en = report.origin_counts.get("en", 0)
    report.origin_delta = abs(ar - en)
    report.origin_balance_flag = report.origin_delta > tolerance
    report.off_list_domains = sorted(
        d for d in report.domain_histogram if d not in KNOWN_DOMAINS and d != "unlabeled"
    )
    return report


def domain_distribution(
    entries: Iterable[BenchmarkEntry | ParallelPair],
) -> tuple[dict[str, int], str]:
    """Histogram of domain labels plus a text bar summary; missing labels
    count as "unlabeled"."""
    hist: dict[str, int] = {}
    for entry in entries:
        key = entry.domain if entry.domain is not None else "unlabeled"
        hist[key] = hist.get(key, 0) + 1
    total = sum(hist.values())
    lines = []
    width = max((len(k) for k in hist), default=0)
    for key, count in sorted(hist.items(), key=lambda kv: (-kv[1], kv[0])):
        bar = "#" * max(1, round(40 * count / total)) if total else ""
        lines.append(f"{key:<{width}}  {count:>7}  {bar}")
    return hist, "\n".join(lines)


def domain_distribution_csv(hist: dict[str, int]) -> str:
    rows = ["domain,count"]
    rows += [f"{k},{v}" for k, v in sorted(hist.items(), key=lambda kv: (-kv[1], kv[0]))]
    return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class ContaminationHit:
    benchmark_id: str
    corpus_id: str
    side: str  # "ar" | "en"
    ngram: str
    benchmark_pos: int  # word offset in the benchmark text
    corpus_pos: int  # word offset in the corpus text

    def to_dict(self) -> dict:
        return {
            "benchmark_id": self.benchmark_id,
            "corpus_id": self.corpus_id,
            "side": self.side,
            "ngram": self.ngram,
            "benchmark_pos": self.benchmark_pos,
            "corpus_pos": self.corpus_pos,
        }


def scan_words(text: str, side: str) -> list[str]:
    """Normalized word sequence used by the contamination scan."""
    text = normalize_text(text)
    if side == "en":
        text = text.casefold()
    return text.split()


def _hash64(ngram: str) -> int:
    return int.from_bytes(
        hashlib.blake2b(ngram.encode("utf-8"), digest_size=8).digest(), "little"
    )


def contamination_scan(
    corpus: Iterable[ParallelPair],
    entries: list[BenchmarkEntry] | list[ParallelPair],
    n: int = 8,
) -> list[ContaminationHit]:
    """Report every word n-gram shared between a benchmark side and the same
    side of any corpus pair.

    One hit per distinct (benchmark id, corpus id, side, n-gram); positions
    record the first occurrence in each text. Memory is O(benchmark n-grams);
    the corpus is streamed once.
    """
    if n < 3:
        raise ValueError("n-gram order must be >= 3")

    # hash -> [(entry index, side, word position)]; texts stay in `entries`
    # so candidates can be re-verified by exact string comparison.
    index: dict[int, list[tuple[int, str, int]]] = {}
    words_cache: dict[tuple[int, str], list[str]] = {}
    for ei, entry in enumerate(entries):
        for side in ("ar", "en"):
            words = scan_words(entry.side(side), side)
            words_cache[(ei, side)] = words
            for pos in range(len(words) - n + 1):
                gram = " ".join(words[pos : pos + n])
                index.setdefault(_hash64(gram), []).append((ei, side, pos))

    hits: dict[tuple[str, str, str, str], ContaminationHit] = {}
    for pair in corpus:
        for side in ("ar", "en"):
            words = scan_words(pair.side(side), side)
            for pos in range(len(words) - n + 1):
                gram = " ".join(words[pos : pos + n])
                candidates = index.get(_hash64(gram))
                if not candidates:
                    continue
                for ei, bench_side, bench_pos in candidates:
                    if bench_side != side:
                        continue
                    bench_words = words_cache[(ei, bench_side)]
                    if " ".join(bench_words[bench_pos : bench_pos + n]) != gram:
                        continue  # 64-bit collision; discard
                    key = (entries[ei].id, pair.id, side, gram)
                    if key not in hits:
                        hits[key] = ContaminationHit(
                            benchmark_id=entries[ei].id,
                            corpus_id=pair.id,
                            side=side,
                            ngram=gram,
                            benchmark_pos=bench_pos,
                            corpus_pos=pos,
                        )
    return sorted(
        hits.values(),
        key=lambda h: (h.benchmark_id, h.corpus_id, h.side, h.ngram),
    )
