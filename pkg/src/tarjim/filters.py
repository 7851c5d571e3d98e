"""Streaming clean-up rules for parallel corpora.

Four composable stages, applied in a fixed cheap-first order:

1. minimum token count (either side below the floor rejects the pair)
2. script/language check (letter codepoints must mostly belong to the
   side's expected script)
3. character length-ratio check, with an exemption floor for short pairs
4. exact deduplication on normalized text, first occurrence wins

Every pair is attributed to at most one rejection rule and accounting is
exact: ``accepted + sum(rejected per rule) == input``. The pipeline is
deterministic, order-preserving, and idempotent on its own output.
"""

from __future__ import annotations

import hashlib
import re
import unicodedata
from collections.abc import Iterable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

from .errors import ConfigError
from .records import ParallelPair

_WS_RUN = re.compile(r"\s+")

# Arabic script blocks: core, Supplement, Extended-A.
_ARABIC_RANGES = ((0x0600, 0x06FF), (0x0750, 0x077F), (0x08A0, 0x08FF))
# Latin letters: Basic Latin, Latin-1 Supplement, Latin Extended-A/B.
_LATIN_RANGES = ((0x0041, 0x005A), (0x0061, 0x007A), (0x00C0, 0x00FF),
                 (0x0100, 0x017F), (0x0180, 0x024F))


class Rule(str, Enum):
    MIN_TOKENS = "min_tokens"
    LANGUAGE_MISMATCH = "language_mismatch"
    LENGTH_RATIO = "length_ratio"
    DUPLICATE = "duplicate"
    NONE = "none"


# Stage order is fixed: cheap rules first, dedup only among pairs that
# passed everything else.
STAGE_ORDER = (Rule.MIN_TOKENS, Rule.LANGUAGE_MISMATCH, Rule.LENGTH_RATIO, Rule.DUPLICATE)


@dataclass(frozen=True)
class FilterConfig:
    min_tokens: int = 3
    arabic_letter_fraction_min: float = 0.8
    latin_letter_fraction_min: float = 0.8
    max_char_ratio: float = 3.0
    ratio_min_chars: int = 30
    dedup_normalize_case: bool = True  # English side only

    def __post_init__(self) -> None:
        if self.min_tokens < 1:
            raise ConfigError("min_tokens must be >= 1")
        if self.max_char_ratio <= 1:
            raise ConfigError("max_char_ratio must be > 1")
        for name in ("arabic_letter_fraction_min", "latin_letter_fraction_min"):
            frac = getattr(self, name)
            if not (0 < frac <= 1):
                raise ConfigError(f"{name} must be in (0, 1]")


@dataclass(frozen=True)
class FilterDecision:
    verdict: str  # "accept" | "reject"
    rule: Rule
    detail: str = ""

    def __post_init__(self) -> None:
        assert (self.verdict == "accept") == (self.rule is Rule.NONE)


ACCEPT = FilterDecision("accept", Rule.NONE)


def _reject(rule: Rule, detail: str = "") -> FilterDecision:
    return FilterDecision("reject", rule, detail)


@dataclass
class FilterReport:
    input_count: int = 0
    accepted_count: int = 0
    rejected: dict[str, int] = field(
        default_factory=lambda: {r.value: 0 for r in STAGE_ORDER}
    )
    rejected_samples: dict[str, list[str]] = field(
        default_factory=lambda: {r.value: [] for r in STAGE_ORDER}
    )
    sample_cap: int = 20

    def record(self, pair_id: str, decision: FilterDecision) -> None:
        if decision.verdict == "accept":
            self.accepted_count += 1
        else:
            key = decision.rule.value
            self.rejected[key] += 1
            if len(self.rejected_samples[key]) < self.sample_cap:
                self.rejected_samples[key].append(pair_id)

    def to_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "accepted_count": self.accepted_count,
            "rejected": dict(self.rejected),
            "rejected_samples": {k: list(v) for k, v in self.rejected_samples.items()},
        }


def normalize_text(text: str) -> str:
    """Canonical composition (NFC), trim, and collapse whitespace runs.

    No orthographic stripping: diacritics and tatweel survive, so distinct
    Arabic spellings stay distinct.
    """
    return _WS_RUN.sub(" ", unicodedata.normalize("NFC", text)).strip()


def min_token_filter(pair: ParallelPair, cfg: FilterConfig) -> FilterDecision:
    """Reject pairs where either side has fewer than ``cfg.min_tokens``
    whitespace-delimited tokens."""
    ar_n = len(pair.ar.split())
    en_n = len(pair.en.split())
    if ar_n < cfg.min_tokens or en_n < cfg.min_tokens:
        return _reject(Rule.MIN_TOKENS, f"ar={ar_n} en={en_n} min={cfg.min_tokens}")
    return ACCEPT


_NOT_LETTER, _ARABIC_LETTER, _LATIN_LETTER, _OTHER_LETTER = 0, 1, 2, 3


@lru_cache(maxsize=65536)
def _char_class(ch: str) -> int:
    if not unicodedata.category(ch).startswith("L"):
        return _NOT_LETTER
    cp = ord(ch)
    for lo, hi in _ARABIC_RANGES:
        if lo <= cp <= hi:
            return _ARABIC_LETTER
    for lo, hi in _LATIN_RANGES:
        if lo <= cp <= hi:
            return _LATIN_LETTER
    return _OTHER_LETTER


def _script_fraction(text: str, expected: int) -> tuple[int, int]:
    """(letters in expected script, total letters); digits/punct/space ignored."""
    letters = 0
    matching = 0
    for ch in text:
        cls = _char_class(ch)
        if cls:
            letters += 1
            if cls == expected:
                matching += 1
    return matching, letters


def script_language_filter(pair: ParallelPair, cfg: FilterConfig) -> FilterDecision:
    """Reject pairs whose sides are not (mostly) in their expected script.

    Per side, the fraction of letter codepoints inside the expected Unicode
    blocks must reach the configured minimum; a side with no letters at all
    is rejected."""
    for side, expected, minimum in (
        ("ar", _ARABIC_LETTER, cfg.arabic_letter_fraction_min),
        ("en", _LATIN_LETTER, cfg.latin_letter_fraction_min),
    ):
        matching, letters = _script_fraction(pair.side(side), expected)
        if letters == 0:
            return _reject(Rule.LANGUAGE_MISMATCH, f"{side} side has no letters")
        if matching / letters < minimum:
            return _reject(
                Rule.LANGUAGE_MISMATCH,
                f"{side} script fraction {matching / letters:.3f} < {minimum}",
            )
    return ACCEPT


def length_ratio_filter(pair: ParallelPair, cfg: FilterConfig) -> FilterDecision:
    """Reject pairs whose normalized character lengths differ by more than
    ``cfg.max_char_ratio``; pairs shorter than ``cfg.ratio_min_chars`` on both
    sides are exempt."""
    a = len(normalize_text(pair.ar))
    e = len(normalize_text(pair.en))
    longer, shorter = max(a, e), min(a, e)
    if longer < cfg.ratio_min_chars:
        return ACCEPT
    ratio = longer / shorter if shorter > 0 else float("inf")
    if ratio > cfg.max_char_ratio:
        return _reject(Rule.LENGTH_RATIO, f"ratio {ratio:.2f} > {cfg.max_char_ratio}")
    return ACCEPT


def dedup_key(pair: ParallelPair, cfg: FilterConfig) -> bytes:
    """Digest of the normalized pair text; English casing folded when
    configured. Length-prefix framing keeps (ar, en) boundaries unambiguous."""
    ar = normalize_text(pair.ar).encode("utf-8")
    en = normalize_text(pair.en)
    if cfg.dedup_normalize_case:
        en = en.lower()
    en_b = en.encode("utf-8")
    h = hashlib.blake2b(digest_size=16)
    h.update(len(ar).to_bytes(8, "little"))
    h.update(ar)
    h.update(en_b)
    return h.digest()


def dedup_stage(
    pairs: Iterable[ParallelPair], cfg: FilterConfig
) -> Iterator[tuple[ParallelPair, FilterDecision]]:
    """Yield (pair, decision); first occurrence in stream order accepts,
    later exact repeats reject."""
    seen: set[bytes] = set()
    for pair in pairs:
        key = dedup_key(pair, cfg)
        if key in seen:
            yield pair, _reject(Rule.DUPLICATE)
        else:
            seen.add(key)
            yield pair, ACCEPT


def _stage_decision(pair: ParallelPair, cfg: FilterConfig) -> FilterDecision:
    """First failing pure stage wins (dedup handled separately)."""
    for stage in (min_token_filter, script_language_filter, length_ratio_filter):
        decision = stage(pair, cfg)
        if decision.verdict == "reject":
            return decision
    return ACCEPT


def run_pipeline(
    pairs: Iterable[ParallelPair],
    cfg: FilterConfig | None = None,
    workers: int = 1,
    report: FilterReport | None = None,
) -> tuple[Iterator[ParallelPair], FilterReport]:
    """Run all four stages over a stream.

    Returns the surviving stream plus a report that is complete once the
    stream is exhausted. ``workers`` > 1 maps the pure per-record stages over
    a thread pool in order-preserving chunks; the dedup fold stays serial, so
    output and report are identical for any worker count.
    """
    cfg = cfg or FilterConfig()
    rep = report if report is not None else FilterReport()

    def decided() -> Iterator[tuple[ParallelPair, FilterDecision]]:
        if workers <= 1:
            for pair in pairs:
                yield pair, _stage_decision(pair, cfg)
        else:
            # Order-preserving map; parallel mode buffers the input.
            buffered = list(pairs)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                decisions = pool.map(lambda p: _stage_decision(p, cfg), buffered)
                yield from zip(buffered, decisions)

    def gen() -> Iterator[ParallelPair]:
        seen: set[bytes] = set()
        for pair, decision in decided():
            rep.input_count += 1
            if decision.verdict == "reject":
                rep.record(pair.id, decision)
                continue
            key = dedup_key(pair, cfg)
            if key in seen:
                rep.record(pair.id, _reject(Rule.DUPLICATE))
                continue
            seen.add(key)
            rep.record(pair.id, ACCEPT)
            yield pair

    return gen(), rep
