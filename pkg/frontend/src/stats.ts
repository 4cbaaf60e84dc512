export interface Histogram {
  edges: number[];    // nBins + 1
  centers: number[];  // nBins
  densities: number[];
}

/**
 * Density histogram over a fixed range (defaults to the sample extent),
 * normalized so the densities integrate to 1.
 */
export function histogram(
  values: number[],
  nBins = 24,
  lo?: number,
  hi?: number,
): Histogram {
  if (values.length === 0) throw new Error("histogram needs at least one sample");
  let min = lo ?? Math.min(...values);
  let max = hi ?? Math.max(...values);
  if (max === min) {
    min -= 0.5;
    max += 0.5;
  }
  const width = (max - min) / nBins;
  const counts = new Array<number>(nBins).fill(0);
  for (const v of values) {
    const idx = Math.min(Math.max(Math.floor((v - min) / width), 0), nBins - 1);
    counts[idx]++;
  }
  const edges = Array.from({ length: nBins + 1 }, (_, i) => min + i * width);
  const centers = Array.from({ length: nBins }, (_, i) => min + (i + 0.5) * width);
  const densities = counts.map((c) => c / (values.length * width));
  return { edges, centers, densities };
}

/** Probability mass of each distinct value, sorted ascending. */
export function pmf(values: number[]): Array<{ value: number; prob: number }> {
  if (values.length === 0) throw new Error("pmf needs at least one sample");
  const counts = new Map<number, number>();
  for (const v of values) counts.set(v, (counts.get(v) ?? 0) + 1);
  return [...counts.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([value, count]) => ({ value, prob: count / values.length }));
}

/**
 * Empirical CDF evaluated at the sorted sample points: cum[i] is the
 * fraction of samples <= values[i].
 */
export function ecdf(values: number[]): { values: number[]; cumProb: number[] } {
  if (values.length === 0) throw new Error("ecdf needs at least one sample");
  const sorted = [...values].sort((a, b) => a - b);
  const cumProb = sorted.map((_, i) => (i + 1) / sorted.length);
  return { values: sorted, cumProb };
}

/**
 * Expand (value, cumulative probability) pairs into the vertices of a
 * right-continuous step function starting at probability 0.
 */
export function stepPoints(values: number[], probs: number[]): Array<[number, number]> {
  const pts: Array<[number, number]> = [];
  let prev = 0;
  for (let i = 0; i < values.length; i++) {
    if (pts.length === 0 || values[i] !== pts[pts.length - 1][0]) {
      pts.push([values[i], prev]);
    }
    pts.push([values[i], probs[i]]);
    prev = probs[i];
  }
  return pts;
}
