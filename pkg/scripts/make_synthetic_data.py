#!/usr/bin/env python3
"""Generate synthetic Arabic/English data for demos and smoke runs.

Writes three files into --out-dir:
  raw.jsonl    -- parallel corpus with planted violations of every filter rule
  bench.jsonl  -- benchmark-shaped entries (balanced origin, 50-100 word
                  origin sides, domain labels)
  contaminated.jsonl -- copy of raw.jsonl with benchmark 8-gram spans planted

Usage:
  python scripts/make_synthetic_data.py --out-dir demo/ --pairs 2000 --bench 200 --seed 7
"""

from __future__ import annotations

import argparse
import random
from pathlib import Path

from tarjim.corpus_io import write_pairs
from tarjim.records import BenchmarkEntry, Origin, ParallelPair, Split

AR_WORDS = (
    "في من على إلى عن كتاب مدرسة سلام عالم لغة ترجمة نص جملة يوم كبير صغير "
    "جديد قديم مدينة بلد بحر شمس قمر ليل نهار علم عمل وقت ساعة سنة شهر أسبوع "
    "طريق بيت باب نافذة شجرة ماء هواء نار أرض سماء قلب عقل كلمة صوت صورة خبر"
).split()
EN_WORDS = (
    "the of and to in book school peace world language translation text sentence "
    "day large small new old city country sea sun moon night morning science work "
    "time hour year month week road house door window tree water air fire earth "
    "sky heart mind word voice picture news question answer"
).split()
DOMAINS = ["cultural", "general", "healthcare", "legal", "religious", "scientific", "technical"]


def sentence(rng: random.Random, pool: list[str], n: int) -> str:
    return " ".join(rng.choice(pool) for _ in range(max(1, n)))


def make_pairs(rng: random.Random, n: int) -> list[ParallelPair]:
    pairs = []
    for i in range(n):
        n_ar = rng.randint(3, 40)
        n_en = max(3, n_ar + rng.randint(-3, 3))
        pairs.append(ParallelPair(
            id=f"p{i:06d}",
            ar=sentence(rng, AR_WORDS, n_ar),
            en=sentence(rng, EN_WORDS, n_en),
            origin=rng.choice([Origin.ARABIC, Origin.ENGLISH]),
            domain=rng.choice(DOMAINS),
        ))
    # plant violations: short, script-swapped, ratio-broken, duplicated
    pairs.append(ParallelPair(id="bad-short", ar="مرحبا بكم",
                              en="hello over there", origin=Origin.ARABIC))
    pairs.append(ParallelPair(id="bad-script", ar="english where arabic belongs",
                              en="english where arabic belongs", origin=Origin.ARABIC))
    pairs.append(ParallelPair(id="bad-ratio", ar=sentence(rng, AR_WORDS, 80),
                              en="three tiny words", origin=Origin.ARABIC))
    pairs.append(ParallelPair(id="bad-dup", ar=pairs[0].ar, en=pairs[0].en,
                              origin=pairs[0].origin))
    return pairs


def make_bench(rng: random.Random, n: int) -> list[BenchmarkEntry]:
    entries = []
    for i in range(n):
        origin = Origin.ARABIC if i % 2 == 0 else Origin.ENGLISH
        n_origin = rng.randint(50, 100)
        n_other = max(3, round(n_origin * rng.uniform(0.8, 1.2)))
        ar_n, en_n = (n_origin, n_other) if origin is Origin.ARABIC else (n_other, n_origin)
        entries.append(BenchmarkEntry(
            id=f"b{i:05d}",
            ar=sentence(rng, AR_WORDS, ar_n),
            en=sentence(rng, EN_WORDS, en_n),
            origin=origin,
            domain=rng.choice(DOMAINS),
            split=Split.TEST,
        ))
    return entries


def plant_contamination(rng: random.Random, pairs: list[ParallelPair],
                        entries: list[BenchmarkEntry], count: int) -> list[ParallelPair]:
    out = list(pairs)
    victims = rng.sample(range(len(out)), k=min(count, len(out)))
    for k, ci in enumerate(victims):
        entry = entries[k % len(entries)]
        side = "en" if k % 2 == 0 else "ar"
        words = entry.side(side).split()
        start = rng.randint(0, len(words) - 8)
        span = " ".join(words[start:start + 8])
        old = out[ci]
        text = old.side(side) + " " + span
        out[ci] = ParallelPair(id=old.id,
                               ar=text if side == "ar" else old.ar,
                               en=text if side == "en" else old.en,
                               origin=old.origin, domain=old.domain, meta=old.meta)
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--bench", type=int, default=200)
    parser.add_argument("--contaminate", type=int, default=10)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    pairs = make_pairs(rng, args.pairs)
    entries = make_bench(rng, args.bench)
    contaminated = plant_contamination(rng, pairs, entries, args.contaminate)

    print(f"raw pairs:     {write_pairs(pairs, out / 'raw.jsonl')}")
    print(f"benchmark:     {write_pairs(entries, out / 'bench.jsonl')}")
    print(f"contaminated:  {write_pairs(contaminated, out / 'contaminated.jsonl')}")


if __name__ == "__main__":
    main()
