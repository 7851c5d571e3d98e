"""Deterministic corpus-level BLEU and chrF++ with WMT-compatible
tokenization.

Single-reference only. BLEU follows the mteval international convention:
v13a tokenization, clipped 1-4-gram precisions summed corpus-wide, an
exponential floor applied to zero-match orders, geometric mean, and a
brevity penalty over corpus token totals. chrF++ accumulates character
1-6-gram and word 1-2-gram statistics corpus-wide, averages precision and
recall over orders with material on both sides, and combines them with
beta = 2.

Both metrics are pure functions of their text inputs: no locale, no RNG,
no floating-point accumulation order dependence beyond the fixed loops.
"""

from __future__ import annotations

import math
import re
import string
from collections import Counter
from dataclasses import dataclass

from .errors import ConfigError

BLEU_MAX_ORDER = 4
CHRF_CHAR_ORDER = 6
CHRF_WORD_ORDER = 2
CHRF_BETA = 2.0

_PUNCTS = set(string.punctuation)

# v13a: surround ASCII punctuation runs with spaces, keep digit-flanked
# periods/commas intact, split a dash after a digit.
_PUNCT_BLOCK = re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])")
_NONDIGIT_DOT = re.compile(r"([^0-9])([\.,])")
_DOT_NONDIGIT = re.compile(r"([\.,])([^0-9])")
_DIGIT_DASH = re.compile(r"([0-9])(-)")


@dataclass(frozen=True)
class MetricConfig:
    bleu_max_order: int = BLEU_MAX_ORDER
    bleu_smoothing: str = "exp_floor"  # "exp_floor" | "none"
    chrf_char_order: int = CHRF_CHAR_ORDER
    chrf_word_order: int = CHRF_WORD_ORDER
    chrf_beta: float = CHRF_BETA
    lowercase: bool = False

    def __post_init__(self) -> None:
        if self.bleu_max_order < 1 or self.chrf_char_order < 1 or self.chrf_word_order < 0:
            raise ConfigError("n-gram orders must be >= 1")
        if self.chrf_beta <= 0:
            raise ConfigError("chrf_beta must be > 0")
        if self.bleu_smoothing not in ("exp_floor", "none"):
            raise ConfigError(f"unknown smoothing: {self.bleu_smoothing!r}")

    def fingerprint(self) -> str:
        return (
            f"bleu|order:{self.bleu_max_order}|smooth:{self.bleu_smoothing}"
            f"|tok:v13a+chrf|char:{self.chrf_char_order}|word:{self.chrf_word_order}"
            f"|beta:{self.chrf_beta:g}|case:{'lc' if self.lowercase else 'mixed'}"
        )


@dataclass
class BleuScore:
    score: float  # 0-100
    precisions: list[float]  # per order, 0-1, post smoothing
    brevity_penalty: float
    hyp_len: int
    ref_len: int

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "precisions": list(self.precisions),
            "brevity_penalty": self.brevity_penalty,
            "hyp_len": self.hyp_len,
            "ref_len": self.ref_len,
        }


@dataclass
class ChrfScore:
    score: float  # 0-100
    avg_precision: float  # 0-1
    avg_recall: float  # 0-1

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "avg_precision": self.avg_precision,
            "avg_recall": self.avg_recall,
        }


def tokenize_v13a(text: str) -> list[str]:
    """WMT international tokenization for BLEU.

    Normalizes the common XML escapes, isolates ASCII punctuation, keeps
    periods/commas flanked by digits attached, splits a dash preceded by a
    digit, and splits on whitespace.
    """
    norm = text
    norm = norm.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    norm = norm.replace("&quot;", '"')
    norm = norm.replace("&amp;", "&")
    norm = norm.replace("&lt;", "<")
    norm = norm.replace("&gt;", ">")
    norm = f" {norm} "
    norm = _PUNCT_BLOCK.sub(r" \1 ", norm)
    norm = _NONDIGIT_DOT.sub(r"\1 \2 ", norm)
    norm = _DOT_NONDIGIT.sub(r" \1 \2", norm)
    norm = _DIGIT_DASH.sub(r"\1 \2 ", norm)
    return norm.split()


def _ngram_counts(tokens: list[str], max_order: int) -> Counter:
    counts: Counter = Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


def corpus_bleu(
    hyps: list[str], refs: list[str], cfg: MetricConfig | None = None
) -> BleuScore:
    """Corpus BLEU over line-aligned hypothesis/reference lists."""
    cfg = cfg or MetricConfig()
    if len(hyps) != len(refs):
        raise ConfigError(f"hyp/ref length mismatch: {len(hyps)} vs {len(refs)}")
    if not hyps:
        raise ConfigError("empty corpus")
    max_order = cfg.bleu_max_order

    correct = [0] * max_order
    total = [0] * max_order
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        if cfg.lowercase:
            hyp, ref = hyp.lower(), ref.lower()
        hyp_tokens = tokenize_v13a(hyp.rstrip())
        ref_tokens = tokenize_v13a(ref.rstrip())
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        hyp_ngrams = _ngram_counts(hyp_tokens, max_order)
        ref_ngrams = _ngram_counts(ref_tokens, max_order)
        for ngram, count in hyp_ngrams.items():
            n = len(ngram)
            total[n - 1] += count
            correct[n - 1] += min(count, ref_ngrams.get(ngram, 0))

    if hyp_len < ref_len:
        brevity_penalty = math.exp(1 - ref_len / hyp_len) if hyp_len > 0 else 0.0
    else:
        brevity_penalty = 1.0

    precisions = [0.0] * max_order
    floor = 1.0
    for n in range(1, max_order + 1):
        if total[n - 1] == 0:
            break
        if correct[n - 1] == 0:
            if cfg.bleu_smoothing == "exp_floor":
                floor *= 2.0
                precisions[n - 1] = 1.0 / (floor * total[n - 1])
            # "none": precision stays 0 and zeroes the score below
        else:
            precisions[n - 1] = correct[n - 1] / total[n - 1]

    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        log_sum = sum(math.log(p) for p in precisions)
        score = 100.0 * brevity_penalty * math.exp(log_sum / max_order)
    return BleuScore(
        score=score,
        precisions=precisions,
        brevity_penalty=brevity_penalty,
        hyp_len=hyp_len,
        ref_len=ref_len,
    )


def split_punctuation(text: str) -> list[str]:
    """Word tokenization used for chrF++ word n-grams: one leading or
    trailing ASCII punctuation character is split off each whitespace word."""
    words: list[str] = []
    for w in text.split():
        if len(w) == 1:
            words.append(w)
        elif w[-1] in _PUNCTS:
            words.extend((w[:-1], w[-1]))
        elif w[0] in _PUNCTS:
            words.extend((w[0], w[1:]))
        else:
            words.append(w)
    return words


def _char_ngrams(text: str, n: int) -> Counter:
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))


def _word_ngrams(words: list[str], n: int) -> Counter:
    return Counter(tuple(words[i : i + n]) for i in range(len(words) - n + 1))


@dataclass
class _OrderStats:
    hyp: int = 0
    ref: int = 0
    match: int = 0


def _segment_ngrams(text: str, cfg: MetricConfig) -> list[Counter]:
    """Per-order n-gram counters: char orders first, then word orders."""
    compact = "".join(text.split())
    counters = [_char_ngrams(compact, n) for n in range(1, cfg.chrf_char_order + 1)]
    if cfg.chrf_word_order > 0:
        words = split_punctuation(text)
        counters.extend(_word_ngrams(words, n) for n in range(1, cfg.chrf_word_order + 1))
    return counters


def corpus_chrf_pp(
    hyps: list[str], refs: list[str], cfg: MetricConfig | None = None
) -> ChrfScore:
    """Corpus chrF++ over line-aligned hypothesis/reference lists."""
    cfg = cfg or MetricConfig()
    if len(hyps) != len(refs):
        raise ConfigError(f"hyp/ref length mismatch: {len(hyps)} vs {len(refs)}")
    if not hyps:
        raise ConfigError("empty corpus")

    n_orders = cfg.chrf_char_order + cfg.chrf_word_order
    stats = [_OrderStats() for _ in range(n_orders)]
    for hyp, ref in zip(hyps, refs):
        if cfg.lowercase:
            hyp, ref = hyp.lower(), ref.lower()
        hyp_counters = _segment_ngrams(hyp, cfg)
        ref_counters = _segment_ngrams(ref, cfg)
        for order, (h, r) in enumerate(zip(hyp_counters, ref_counters)):
            st = stats[order]
            st.ref += sum(r.values())
            for gram, count in h.items():
                st.hyp += count
                if gram in r:
                    st.match += min(count, r[gram])

    avg_precision = 0.0
    avg_recall = 0.0
    effective = 0
    for st in stats:
        if st.hyp > 0 and st.ref > 0:
            avg_precision += st.match / st.hyp
            avg_recall += st.match / st.ref
            effective += 1
    if effective:
        avg_precision /= effective
        avg_recall /= effective

    beta_sq = cfg.chrf_beta**2
    if avg_precision + avg_recall > 0:
        score = (
            100.0
            * (1 + beta_sq)
            * avg_precision
            * avg_recall
            / (beta_sq * avg_precision + avg_recall)
        )
    else:
        score = 0.0
    return ChrfScore(score=score, avg_precision=avg_precision, avg_recall=avg_recall)
