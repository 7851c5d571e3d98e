/**
 * Translation-quality scorer behind the service.
 *
 * The default pinned "checkpoint" is a deterministic lexical estimator:
 * a character n-gram F-score between the hypothesis and the reference
 * (orders 1-4), blended with a length-agreement prior against the source.
 * It is not a neural model, but it honours every contract property the
 * clients rely on: scores in [0, 1], bitwise determinism, perfect copies
 * scoring above corrupted hypotheses. Real checkpoints can be swapped in
 * by implementing the same interface.
 */

export interface ScoreTriple {
  src: string;
  mt: string;
  ref: string;
}

export interface Checkpoint {
  readonly modelId: string;
  readonly device: string;
  scoreBatch(pairs: ScoreTriple[], batchSize: number): number[];
}

const MAX_ORDER = 4;

function charNgrams(text: string, n: number): Map<string, number> {
  const counts = new Map<string, number>();
  const compact = text.split(/\s+/).join(" ").trim();
  for (let i = 0; i + n <= compact.length; i++) {
    const gram = compact.slice(i, i + n);
    counts.set(gram, (counts.get(gram) ?? 0) + 1);
  }
  return counts;
}

function overlapF(mt: string, ref: string): number {
  let fSum = 0;
  let orders = 0;
  for (let n = 1; n <= MAX_ORDER; n++) {
    const mtGrams = charNgrams(mt, n);
    const refGrams = charNgrams(ref, n);
    let mtTotal = 0;
    let match = 0;
    for (const [gram, count] of mtGrams) {
      mtTotal += count;
      const other = refGrams.get(gram);
      if (other !== undefined) {
        match += Math.min(count, other);
      }
    }
    let refTotal = 0;
    for (const count of refGrams.values()) {
      refTotal += count;
    }
    if (mtTotal === 0 || refTotal === 0) {
      continue;
    }
    const precision = match / mtTotal;
    const recall = match / refTotal;
    fSum += precision + recall > 0 ? (2 * precision * recall) / (precision + recall) : 0;
    orders += 1;
  }
  return orders > 0 ? fSum / orders : 0;
}

function lengthAgreement(mt: string, src: string): number {
  const a = mt.trim().length;
  const b = src.trim().length;
  if (a === 0 || b === 0) {
    return 0;
  }
  return Math.min(a, b) / Math.max(a, b);
}

export function scoreTriple(triple: ScoreTriple): number {
  const score = 0.9 * overlapF(triple.mt, triple.ref) + 0.1 * lengthAgreement(triple.mt, triple.src);
  return Math.min(1, Math.max(0, score));
}

export class LexicalCheckpoint implements Checkpoint {
  readonly device = "cpu";

  constructor(readonly modelId: string) {}

  scoreBatch(pairs: ScoreTriple[], batchSize: number): number[] {
    const segments: number[] = [];
    // batchSize shapes the inference slices; results are order-preserving
    for (let start = 0; start < pairs.length; start += batchSize) {
      for (const triple of pairs.slice(start, start + batchSize)) {
        segments.push(scoreTriple(triple));
      }
    }
    return segments;
  }
}

/** Asynchronous checkpoint initialisation (I/O-free for the default). */
export async function loadCheckpoint(modelId: string): Promise<Checkpoint> {
  return new LexicalCheckpoint(modelId);
}
