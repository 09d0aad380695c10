/** Series transforms behind the figures: smoothing and empirical CDFs. */

/** Trailing running mean: out[t] averages the last `window` values up to t. */
export function runningMean(values: number[], window: number): number[] {
  if (!Number.isInteger(window) || window < 1) {
    throw new RangeError("window must be a positive integer");
  }
  const out = new Array<number>(values.length);
  let acc = 0;
  for (let t = 0; t < values.length; t++) {
    acc += values[t]!;
    if (t >= window) acc -= values[t - window]!;
    out[t] = acc / Math.min(t + 1, window);
  }
  return out;
}

export interface Curve {
  x: number[];
  y: number[];
}

/**
 * Empirical CDF as a staircase polyline from (min, 0) up to (max, 1).
 *
 * Duplicate sample values collapse into one riser, so a single repeated
 * value yields the pure step (v,0) -> (v,1). Input order never matters.
 */
export function ecdf(samples: number[]): Curve {
  if (samples.length === 0) throw new RangeError("no samples");
  const sorted = [...samples].sort((a, b) => a - b);
  const n = sorted.length;
  const x: number[] = [sorted[0]!];
  const y: number[] = [0];
  let i = 0;
  while (i < n) {
    const v = sorted[i]!;
    let j = i;
    while (j < n && sorted[j] === v) j++;
    x.push(v, v);
    y.push(y[y.length - 1]!, j / n);
    i = j;
  }
  // drop the duplicated (x0, 0) corner the loop re-adds
  x.splice(1, 1);
  y.splice(1, 1);
  return { x, y };
}
