/**
 * Hashed character n-gram features (FNV-1a 32) with L2 normalization.
 *
 * This is the trainable encoder front-end: no vocabulary, works for any
 * script, and keeps checkpoints self-contained.
 */

export interface HashingConfig {
  ngramMin: number;
  ngramMax: number;
  hashDim: number; // power of two
  seed: number;
}

export const DEFAULT_HASHING: HashingConfig = {
  ngramMin: 1,
  ngramMax: 4,
  hashDim: 1 << 15,
  seed: 0,
};

export interface SparseVec {
  indices: Int32Array;
  values: Float64Array;
}

const encoder = new TextEncoder();

export function fnv1a32(data: Uint8Array, seed: number): number {
  let h = (0x811c9dc5 ^ seed) >>> 0;
  for (const byte of data) {
    h = (h ^ byte) >>> 0;
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

export function featurize(text: string, config: HashingConfig): SparseVec {
  if (text.length === 0) {
    return { indices: new Int32Array(0), values: new Float64Array(0) };
  }
  const mask = config.hashDim - 1;
  const counts = new Map<number, number>();
  const chars = Array.from(text); // code points, not UTF-16 units
  for (let size = config.ngramMin; size <= config.ngramMax; size++) {
    if (size > chars.length) break;
    for (let start = 0; start + size <= chars.length; start++) {
      const gram = chars.slice(start, start + size).join("");
      const bucket = fnv1a32(encoder.encode(gram), config.seed) & mask;
      counts.set(bucket, (counts.get(bucket) ?? 0) + 1);
    }
  }
  const indices = Int32Array.from([...counts.keys()].sort((a, b) => a - b));
  const values = new Float64Array(indices.length);
  let sumSq = 0;
  for (let i = 0; i < indices.length; i++) {
    const v = counts.get(indices[i])!;
    values[i] = v;
    sumSq += v * v;
  }
  const norm = Math.sqrt(sumSq);
  for (let i = 0; i < values.length; i++) values[i] /= norm;
  return { indices, values };
}
