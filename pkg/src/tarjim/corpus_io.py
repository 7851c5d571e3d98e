"""Read, write, and summarize parallel-pair and benchmark files.

JSONL is the canonical format. One object per line with exact keys
``{"id", "ar", "en", "origin", "domain"?, "meta"?}`` where origin is
``"ar"`` or ``"en"``. TSV is a convenience import/export with columns
``id<TAB>ar<TAB>en<TAB>origin[<TAB>domain]`` and backslash escaping for
tabs and backslashes. Newlines are forbidden inside fields in both formats.

Readers are lazy generators: malformed records raise
:class:`MalformedRecordError` with the offending line number at the point
they are reached, and duplicate ids raise :class:`DuplicateIdError` once the
stream is exhausted. Nothing is silently dropped.
"""

from __future__ import annotations

import json
import os
from collections.abc import Iterable, Iterator
from pathlib import Path

from .errors import CorpusError, DuplicateIdError, MalformedRecordError
from .records import (
    LENGTH_BUCKETS,
    BenchmarkEntry,
    ManifestStats,
    Origin,
    ParallelPair,
    Split,
    bucket_label,
)

FORMATS = ("jsonl", "tsv")

_ORIGIN_VALUES = {o.value for o in Origin}


def _check_text(value: str, name: str, line: int) -> str:
    if "\n" in value or "\r" in value:
        raise MalformedRecordError(line, "embedded_newline", f"field {name!r}")
    if not value.strip():
        raise MalformedRecordError(line, "empty_text", f"field {name!r}")
    return value


def _parse_origin(raw: str, line: int) -> Origin:
    if raw not in _ORIGIN_VALUES:
        raise MalformedRecordError(line, "invalid_origin", f"got {raw!r}, expected 'ar' or 'en'")
    return Origin(raw)


def _pair_from_obj(obj: dict, line: int, benchmark: bool) -> ParallelPair:
    if not isinstance(obj, dict):
        raise MalformedRecordError(line, "bad_json", "record is not an object")
    for key in ("id", "ar", "en", "origin"):
        if key not in obj:
            raise MalformedRecordError(line, "missing_field", key)
        if not isinstance(obj[key], str):
            raise MalformedRecordError(line, "bad_type", f"field {key!r} must be a string")
    pair_id = obj["id"]
    if not pair_id:
        raise MalformedRecordError(line, "empty_id")
    ar = _check_text(obj["ar"], "ar", line)
    en = _check_text(obj["en"], "en", line)
    origin = _parse_origin(obj["origin"], line)
    domain = obj.get("domain")
    if domain is not None and not isinstance(domain, str):
        raise MalformedRecordError(line, "bad_type", "field 'domain' must be a string")
    meta = obj.get("meta")
    if meta is not None:
        if not isinstance(meta, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in meta.items()
        ):
            raise MalformedRecordError(line, "bad_type", "field 'meta' must map strings to strings")
        for v in meta.values():
            if "\n" in v or "\r" in v:
                raise MalformedRecordError(line, "embedded_newline", "field 'meta'")
    if benchmark:
        raw_split = obj.get("split", "test")
        if raw_split not in ("dev", "test"):
            raise MalformedRecordError(line, "invalid_split", f"got {raw_split!r}")
        return BenchmarkEntry(
            id=pair_id, ar=ar, en=en, origin=origin, domain=domain, meta=meta,
            split=Split(raw_split),
        )
    return ParallelPair(id=pair_id, ar=ar, en=en, origin=origin, domain=domain, meta=meta)


def _escape_tsv(value: str) -> str:
    return value.replace("\\", "\\\\").replace("\t", "\\t")


def _unescape_tsv(value: str, line: int) -> str:
    out: list[str] = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch == "\\":
            if i + 1 >= len(value):
                raise MalformedRecordError(line, "bad_escape", "dangling backslash")
            nxt = value[i + 1]
            if nxt == "t":
                out.append("\t")
            elif nxt == "n":
                out.append("\n")
            elif nxt == "\\":
                out.append("\\")
            else:
                raise MalformedRecordError(line, "bad_escape", f"\\{nxt}")
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _pair_from_tsv(line_text: str, line: int, benchmark: bool) -> ParallelPair:
    cols = line_text.split("\t")
    if len(cols) < 4 or len(cols) > 5:
        raise MalformedRecordError(line, "column_count", f"got {len(cols)}, expected 4 or 5")
    cols = [_unescape_tsv(c, line) for c in cols]
    obj: dict = {"id": cols[0], "ar": cols[1], "en": cols[2], "origin": cols[3]}
    if len(cols) == 5:
        obj["domain"] = cols[4]
    return _pair_from_obj(obj, line, benchmark)


def read_pairs(
    path: str | Path,
    format: str = "jsonl",
    benchmark: bool = False,
) -> Iterator[ParallelPair]:
    """Lazily yield pairs from ``path`` in file order.

    Raises :class:`MalformedRecordError` when a bad record is reached and
    :class:`DuplicateIdError` at end of stream if any id repeats. With
    ``benchmark=True`` records are :class:`BenchmarkEntry` (optional
    ``split`` key, default ``"test"``).
    """
    if format not in FORMATS:
        raise CorpusError(f"unknown format: {format!r}")
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"no such file: {path}")

    def gen() -> Iterator[ParallelPair]:
        seen: set[str] = set()
        dups: list[str] = []
        with open(path, encoding="utf-8") as f:
            for lineno, raw in enumerate(f, start=1):
                raw = raw.rstrip("\n").rstrip("\r")
                if not raw.strip():
                    continue
                if format == "jsonl":
                    try:
                        obj = json.loads(raw)
                    except json.JSONDecodeError as exc:
                        raise MalformedRecordError(lineno, "bad_json", str(exc)) from exc
                    pair = _pair_from_obj(obj, lineno, benchmark)
                else:
                    pair = _pair_from_tsv(raw, lineno, benchmark)
                if pair.id in seen:
                    dups.append(pair.id)
                else:
                    seen.add(pair.id)
                yield pair
        if dups:
            raise DuplicateIdError(dups)

    return gen()


def read_benchmark(path: str | Path, format: str = "jsonl") -> list[BenchmarkEntry]:
    """Read a benchmark file fully into memory."""
    return list(read_pairs(path, format=format, benchmark=True))  # type: ignore[arg-type]


def _pair_to_obj(pair: ParallelPair) -> dict:
    obj: dict = {"id": pair.id, "ar": pair.ar, "en": pair.en, "origin": pair.origin.value}
    if pair.domain is not None:
        obj["domain"] = pair.domain
    if pair.meta is not None:
        obj["meta"] = pair.meta
    if isinstance(pair, BenchmarkEntry):
        obj["split"] = pair.split.value
    return obj


def write_pairs(
    pairs: Iterable[ParallelPair],
    path: str | Path,
    format: str = "jsonl",
) -> int:
    """Write pairs to ``path``; returns the number written.

    Round-trip stable: re-reading reproduces every field in order. Embedded
    newlines are rejected; TSV additionally rejects pairs carrying ``meta``
    (the TSV schema has no column for it).
    """
    if format not in FORMATS:
        raise CorpusError(f"unknown format: {format!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8") as f:
            for pair in pairs:
                for name, value in (("id", pair.id), ("ar", pair.ar), ("en", pair.en)):
                    if "\n" in value or "\r" in value:
                        raise CorpusError(
                            f"embedded newline in field {name!r} of pair {pair.id!r}"
                        )
                if format == "jsonl":
                    f.write(json.dumps(_pair_to_obj(pair), ensure_ascii=False) + "\n")
                else:
                    if pair.meta:
                        raise CorpusError(
                            f"pair {pair.id!r} carries meta; the TSV schema cannot represent it"
                        )
                    cols = [pair.id, pair.ar, pair.en, pair.origin.value]
                    if pair.domain is not None:
                        cols.append(pair.domain)
                    f.write("\t".join(_escape_tsv(c) for c in cols) + "\n")
                count += 1
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    os.replace(tmp, path)
    return count


def _bucket_for(tokens: int) -> str:
    for lo, hi in LENGTH_BUCKETS:
        if tokens >= lo and (hi is None or tokens <= hi):
            return bucket_label(lo, hi)
    # tokens == 0 cannot occur for valid records (non-empty after trim)
    return bucket_label(*LENGTH_BUCKETS[0])


def manifest(pairs: Iterable[ParallelPair]) -> ManifestStats:
    """Single-pass, order-insensitive summary of a pair stream."""
    stats = ManifestStats()
    for pair in pairs:
        stats.pair_count += 1
        ar_tokens = len(pair.ar.split())
        en_tokens = len(pair.en.split())
        stats.ar_token_total += ar_tokens
        stats.en_token_total += en_tokens
        ab = _bucket_for(ar_tokens)
        eb = _bucket_for(en_tokens)
        stats.ar_length_hist[ab] = stats.ar_length_hist.get(ab, 0) + 1
        stats.en_length_hist[eb] = stats.en_length_hist.get(eb, 0) + 1
        okey = pair.origin.value
        stats.origin_counts[okey] = stats.origin_counts.get(okey, 0) + 1
        dkey = pair.domain if pair.domain is not None else "unlabeled"
        stats.domain_counts[dkey] = stats.domain_counts.get(dkey, 0) + 1
    return stats
