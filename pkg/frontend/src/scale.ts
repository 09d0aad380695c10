/** Linear axis mapping with round tick values. */

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  const f = ((v: number) =>
    span === 0 ? (r0 + r1) / 2 : r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

/** Step of size 1, 2 or 5 times a power of ten covering the span. */
export function tickStep(min: number, max: number, count: number): number {
  const span = Math.abs(max - min) || 1;
  const raw = span / Math.max(1, count);
  const power = Math.floor(Math.log10(raw));
  const base = 10 ** power;
  const err = raw / base;
  if (err >= 5) return base * 10;
  if (err >= 2) return base * 5;
  if (err >= 1) return base * 2;
  return base;
}

export function ticks(min: number, max: number, count = 5): number[] {
  if (min === max) return [min];
  const step = tickStep(min, max, count);
  const start = Math.ceil(min / step) * step;
  const out: number[] = [];
  // guard float drift at the top end
  for (let v = start; v <= max + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

/** Widen a data extent so curves never sit on the frame. */
export function padded(min: number, max: number, frac = 0.05): [number, number] {
  if (min === max) {
    const pad = Math.abs(min) * frac || 1;
    return [min - pad, max + pad];
  }
  const pad = (max - min) * frac;
  return [min - pad, max + pad];
}
