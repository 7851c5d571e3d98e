"""Build the two training-data layouts from a clean pair stream.

Pre-training: both sentences of a pair, each prefixed by its language tag,
in per-pair randomized order, greedily packed into fixed-length sequences
with an end-of-text token between pairs and a full next-token objective
(all-ones loss mask).

Fine-tuning: one directed sample per pair, ``<tag> source\\n<tag> target``,
with the loss masked to zero over everything up to and including the target
language tag (plus the joining space); loss flows only from target-text
tokens and the final end-of-text token.

All random draws derive from (seed, purpose, pair index), so output is
byte-identical across runs and across any sharding of the input.
"""

from __future__ import annotations

import hashlib
import random
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, TypeVar

from .errors import ConfigError
from .records import ParallelPair
from .tokenizer import ARABIC_TAG, ENGLISH_TAG, Tokenizer

T = TypeVar("T")


class Direction(str, Enum):
    AR2EN = "ar2en"
    EN2AR = "en2ar"

    @property
    def src(self) -> str:
        return "ar" if self is Direction.AR2EN else "en"

    @property
    def tgt(self) -> str:
        return "en" if self is Direction.AR2EN else "ar"


_TAGS = {"ar": ARABIC_TAG, "en": ENGLISH_TAG}


class SegmentRole(str, Enum):
    LANG_TAG = "lang_tag"
    TEXT = "text"
    SEPARATOR = "separator"


@dataclass(frozen=True)
class Segment:
    role: SegmentRole
    lang: str  # "ar" | "en" | "none"
    content: str


@dataclass
class PretrainSequence:
    token_ids: list[int]
    pair_ids: list[str]
    loss_mask: list[int]  # all ones; full-input next-token objective


@dataclass
class FinetuneSample:
    direction: Direction
    segments: list[Segment]
    pair_id: str
    token_ids: list[int] | None = None
    loss_mask: list[int] | None = None


@dataclass(frozen=True)
class ComposerConfig:
    mode: str = "bidirectional"  # bidirectional | ar2en_only | en2ar_only
    ar_source_weight: float = 2.0
    en_source_weight: float = 1.0
    short_fraction: float = 0.15
    short_word_range: tuple[int, int] = (2, 30)
    pretrain_context: int = 2048
    finetune_context: int = 512
    pretrain_separator: str = " "  # intra-pair separator in the packed stream
    seed: int = 7

    def __post_init__(self) -> None:
        if self.mode not in ("bidirectional", "ar2en_only", "en2ar_only"):
            raise ConfigError(f"unknown mode: {self.mode!r}")
        if self.ar_source_weight <= 0 or self.en_source_weight <= 0:
            raise ConfigError("direction weights must be positive")
        if not (0 <= self.short_fraction <= 1):
            raise ConfigError("short_fraction must be in [0, 1]")
        if self.pretrain_context < 16 or self.finetune_context < 16:
            raise ConfigError("context lengths must be >= 16")


@dataclass
class MixReport:
    emitted: int = 0
    direction_counts: dict[str, int] = field(
        default_factory=lambda: {d.value: 0 for d in Direction}
    )
    short_count: int = 0
    short_fraction: float = 0.0
    short_supply_exhausted: bool = False
    dropped_overlength: int = 0


@dataclass
class PackReport:
    sequences: int = 0
    packed_pairs: int = 0
    total_tokens: int = 0
    dropped_overlength: int = 0


def pair_rng(seed: int, purpose: str, index: int) -> random.Random:
    """Deterministic per-pair RNG stream, stable across platforms and
    independent of input sharding."""
    digest = hashlib.blake2b(
        f"{seed}:{purpose}:{index}".encode(), digest_size=8
    ).digest()
    return random.Random(int.from_bytes(digest, "little"))


def render_segments(segments: list[Segment]) -> str:
    """Join segments into the literal training text.

    A language tag is joined to its following text with a single space;
    separator segments appear verbatim."""
    out: list[str] = []
    for i, seg in enumerate(segments):
        if i > 0 and segments[i - 1].role is SegmentRole.LANG_TAG and seg.role is SegmentRole.TEXT:
            out.append(" ")
        out.append(seg.content)
    return "".join(out)


def _tag(lang: str) -> Segment:
    return Segment(SegmentRole.LANG_TAG, lang, _TAGS[lang])


def _text(lang: str, content: str) -> Segment:
    return Segment(SegmentRole.TEXT, lang, content)


def format_pretrain_pair(
    pair: ParallelPair, index: int, cfg: ComposerConfig
) -> list[Segment]:
    """Tagged two-sentence layout with per-pair randomized side order."""
    en_first = pair_rng(cfg.seed, "pretrain-order", index).random() < 0.5
    first, second = ("en", "ar") if en_first else ("ar", "en")
    return [
        _tag(first),
        _text(first, pair.side(first)),
        Segment(SegmentRole.SEPARATOR, "none", cfg.pretrain_separator),
        _tag(second),
        _text(second, pair.side(second)),
    ]


def pack_pretrain(
    pairs: Iterable[ParallelPair],
    tokenizer: Tokenizer,
    cfg: ComposerConfig,
    report: PackReport | None = None,
) -> Iterator[PretrainSequence]:
    """Greedy packing in stream order; a pair never spans two sequences.

    Each formatted pair contributes its tokens plus one end-of-text boundary
    token. Pairs that cannot fit alone are dropped and counted. No padding is
    emitted; that is the trainer's concern.
    """
    rep = report if report is not None else PackReport()
    ids: list[int] = []
    members: list[str] = []

    def flush() -> PretrainSequence | None:
        nonlocal ids, members
        if not ids:
            return None
        seq = PretrainSequence(token_ids=ids, pair_ids=members, loss_mask=[1] * len(ids))
        rep.sequences += 1
        rep.total_tokens += len(ids)
        ids, members = [], []
        return seq

    for index, pair in enumerate(pairs):
        text = render_segments(format_pretrain_pair(pair, index, cfg))
        piece = tokenizer.encode(text) + [tokenizer.eos_id]
        if len(piece) > cfg.pretrain_context:
            rep.dropped_overlength += 1
            continue
        if len(ids) + len(piece) > cfg.pretrain_context:
            seq = flush()
            if seq is not None:
                yield seq
        ids.extend(piece)
        members.append(pair.id)
        rep.packed_pairs += 1
    seq = flush()
    if seq is not None:
        yield seq


def format_finetune(pair: ParallelPair, direction: Direction) -> FinetuneSample:
    """``<src tag> source\\n<tgt tag> target`` segment layout."""
    segments = [
        _tag(direction.src),
        _text(direction.src, pair.side(direction.src)),
        Segment(SegmentRole.SEPARATOR, "none", "\n"),
        _tag(direction.tgt),
        _text(direction.tgt, pair.side(direction.tgt)),
    ]
    return FinetuneSample(direction=direction, segments=segments, pair_id=pair.id)


def apply_loss_mask(
    sample: FinetuneSample,
    tokenizer: Tokenizer,
    cfg: ComposerConfig,
    report: MixReport | None = None,
) -> FinetuneSample | None:
    """Tokenize a formatted sample and attach the causal source mask.

    The zero block covers the source tag, source text, newline, target tag,
    and the joining space; the one block is exactly the target-text tokens
    plus the end-of-text token, so ``decode(masked ids) == target text``.
    Samples longer than the fine-tune context are dropped and counted.
    """
    target = sample.segments[-1]
    if not target.content.strip():
        raise ConfigError(f"pair {sample.pair_id!r}: empty target text, nothing to train on")
    prefix = render_segments(sample.segments[:-1]) + " "
    prefix_ids = tokenizer.encode(prefix)
    target_ids = tokenizer.encode(target.content)
    ids = prefix_ids + target_ids + [tokenizer.eos_id]
    if len(ids) > cfg.finetune_context:
        if report is not None:
            report.dropped_overlength += 1
        return None
    sample.token_ids = ids
    sample.loss_mask = [0] * len(prefix_ids) + [1] * (len(target_ids) + 1)
    return sample


def sample_directions(
    pairs: Iterable[ParallelPair], cfg: ComposerConfig
) -> Iterator[tuple[ParallelPair, Direction]]:
    """Assign a translation direction per pair.

    Unidirectional modes are constant; bidirectional draws per pair with
    P(ar2en) = ar_weight / (ar_weight + en_weight), seeded and deterministic.
    """
    if cfg.mode == "ar2en_only":
        for pair in pairs:
            yield pair, Direction.AR2EN
        return
    if cfg.mode == "en2ar_only":
        for pair in pairs:
            yield pair, Direction.EN2AR
        return
    p_ar2en = cfg.ar_source_weight / (cfg.ar_source_weight + cfg.en_source_weight)
    for index, pair in enumerate(pairs):
        draw = pair_rng(cfg.seed, "direction", index).random()
        yield pair, (Direction.AR2EN if draw < p_ar2en else Direction.EN2AR)


def mix_lengths(
    items: Iterable[T],
    cfg: ComposerConfig,
    word_count: Callable[[T], int],
    report: MixReport | None = None,
) -> list[T]:
    """Interleave short samples into the output at ``cfg.short_fraction``.

    Every long item is emitted; shorts are spread evenly among them up to the
    count that achieves the target fraction of the output (all available
    shorts when supply falls short, with the shortfall flagged). A stream
    with no long items at all emits every short rather than dropping data.
    Relative order within each class is preserved. The supply split requires
    knowing both class sizes, so the input is buffered.
    """
    rep = report if report is not None else MixReport()
    short_max = cfg.short_word_range[1]
    shorts: list[T] = []
    longs: list[T] = []
    for item in items:
        (shorts if word_count(item) <= short_max else longs).append(item)

    f = cfg.short_fraction
    if f <= 0:
        wanted = 0
    elif f >= 1 or not longs:
        wanted = len(shorts)
    else:
        wanted = round(f / (1 - f) * len(longs))
    take = min(wanted, len(shorts))
    if take < wanted:
        rep.short_supply_exhausted = True

    total = len(longs) + take
    out: list[T] = []
    si = li = 0
    for slot in range(total):
        # Bresenham spread: emit a short whenever the running short count
        # falls below the take/total line.
        if si < take and si * total < take * (slot + 1):
            out.append(shorts[si])
            si += 1
        elif li < len(longs):
            out.append(longs[li])
            li += 1
        else:
            out.append(shorts[si])
            si += 1
    rep.emitted = total
    rep.short_count = take
    rep.short_fraction = take / total if total else 0.0
    return out


def compose_finetune(
    pairs: Iterable[ParallelPair],
    tokenizer: Tokenizer,
    cfg: ComposerConfig,
) -> tuple[list[FinetuneSample], MixReport]:
    """Full fine-tune composition: directions, length mix, format, mask."""
    report = MixReport()
    directed = list(sample_directions(pairs, cfg))
    mixed = mix_lengths(
        directed,
        cfg,
        word_count=lambda item: len(item[0].side(item[1].src).split()),
        report=report,
    )
    samples: list[FinetuneSample] = []
    for pair, direction in mixed:
        sample = apply_loss_mask(format_finetune(pair, direction), tokenizer, cfg, report)
        if sample is None:
            continue
        samples.append(sample)
        report.direction_counts[direction.value] += 1
    report.emitted = len(samples)
    report.short_count = sum(
        1
        for s in samples
        if len(_source_text(s).split()) <= cfg.short_word_range[1]
    )
    report.short_fraction = report.short_count / report.emitted if report.emitted else 0.0
    return samples, report


def _source_text(sample: FinetuneSample) -> str:
    return sample.segments[1].content
