"""Core record types shared across the toolchain.

A :class:`ParallelPair` is the universal unit: one Arabic/English sentence
pair with provenance metadata. Benchmark files carry the same fields plus a
dev/test split marker.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Origin(str, Enum):
    """Language a pair's text was originally authored in."""

    ARABIC = "ar"
    ENGLISH = "en"


class Split(str, Enum):
    DEV = "dev"
    TEST = "test"


# Whitespace-token length histogram buckets (inclusive bounds; None = open end).
LENGTH_BUCKETS: tuple[tuple[int, int | None], ...] = (
    (1, 2),
    (3, 10),
    (11, 30),
    (31, 50),
    (51, 100),
    (101, None),
)


def bucket_label(lo: int, hi: int | None) -> str:
    return f"{lo}-{hi}" if hi is not None else f"{lo}+"


@dataclass(frozen=True)
class ParallelPair:
    """One aligned Arabic/English sentence pair.

    Invariants enforced at read time: non-empty id, non-empty trimmed text on
    both sides, no embedded newlines.
    """

    id: str
    ar: str
    en: str
    origin: Origin
    domain: str | None = None
    meta: dict[str, str] | None = None

    def side(self, lang: str) -> str:
        """Return the text for side ``"ar"`` or ``"en"``."""
        if lang == "ar":
            return self.ar
        if lang == "en":
            return self.en
        raise ValueError(f"unknown side: {lang!r}")


@dataclass(frozen=True)
class BenchmarkEntry(ParallelPair):
    split: Split = Split.TEST


@dataclass
class ManifestStats:
    """Order-insensitive summary statistics for a pair stream."""

    pair_count: int = 0
    ar_token_total: int = 0
    en_token_total: int = 0
    ar_length_hist: dict[str, int] = field(default_factory=dict)
    en_length_hist: dict[str, int] = field(default_factory=dict)
    origin_counts: dict[str, int] = field(default_factory=dict)
    domain_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pair_count": self.pair_count,
            "ar_token_total": self.ar_token_total,
            "en_token_total": self.en_token_total,
            "ar_length_hist": dict(sorted(self.ar_length_hist.items())),
            "en_length_hist": dict(sorted(self.en_length_hist.items())),
            "origin_counts": dict(sorted(self.origin_counts.items())),
            "domain_counts": dict(sorted(self.domain_counts.items())),
        }
