/** The two figure builders: smoothed cost-vs-step curves and sample CDFs. */

import { SchemaError } from "./csv.js";
import { linearScale, padded, ticks, type Scale } from "./scale.js";
import { document as svgDocument, el, labelNumber, polylinePoints, text } from "./svg.js";
import { type Curve, ecdf, runningMean } from "./stats.js";

export interface Series {
  label: string;
  values: number[];
}

export interface FigureOptions {
  width?: number;
  height?: number;
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

export const PALETTE = [
  "#4269d0",
  "#efb118",
  "#ff725c",
  "#6cc5b0",
  "#3ca951",
  "#ff8ab7",
  "#a463f2",
  "#97bbf5",
  "#9c6b4e",
  "#9498a0",
] as const;

const MARGIN = { top: 34, right: 16, bottom: 44, left: 58 };

interface Frame {
  sx: Scale;
  sy: Scale;
  body: string[];
}

function frame(
  xDomain: [number, number],
  yDomain: [number, number],
  width: number,
  height: number,
  opts: FigureOptions,
): Frame {
  const sx = linearScale(xDomain, [MARGIN.left, width - MARGIN.right]);
  const sy = linearScale(yDomain, [height - MARGIN.bottom, MARGIN.top]);
  const body: string[] = [];
  body.push(el("rect", { x: 0, y: 0, width, height, fill: "#ffffff" }));
  const axisColor = "#222222";
  const gridColor = "#dddddd";
  for (const tv of ticks(xDomain[0], xDomain[1], 6)) {
    const x = sx(tv);
    body.push(
      el("line", {
        x1: x, y1: MARGIN.top, x2: x, y2: height - MARGIN.bottom,
        stroke: gridColor, "stroke-width": "1",
      }),
      text(labelNumber(tv), {
        x, y: height - MARGIN.bottom + 16,
        "text-anchor": "middle", "font-size": "11", fill: axisColor,
      }),
    );
  }
  for (const tv of ticks(yDomain[0], yDomain[1], 5)) {
    const y = sy(tv);
    body.push(
      el("line", {
        x1: MARGIN.left, y1: y, x2: width - MARGIN.right, y2: y,
        stroke: gridColor, "stroke-width": "1",
      }),
      text(labelNumber(tv), {
        x: MARGIN.left - 6, y: y + 4,
        "text-anchor": "end", "font-size": "11", fill: axisColor,
      }),
    );
  }
  body.push(
    el("rect", {
      x: MARGIN.left, y: MARGIN.top,
      width: width - MARGIN.left - MARGIN.right,
      height: height - MARGIN.top - MARGIN.bottom,
      fill: "none", stroke: axisColor, "stroke-width": "1",
    }),
  );
  if (opts.title) {
    body.push(
      text(opts.title, {
        x: width / 2, y: 20, "text-anchor": "middle",
        "font-size": "13", "font-weight": "bold", fill: axisColor,
      }),
    );
  }
  if (opts.xLabel) {
    body.push(
      text(opts.xLabel, {
        x: (MARGIN.left + width - MARGIN.right) / 2, y: height - 8,
        "text-anchor": "middle", "font-size": "12", fill: axisColor,
      }),
    );
  }
  if (opts.yLabel) {
    const x = 14;
    const y = (MARGIN.top + height - MARGIN.bottom) / 2;
    body.push(
      text(opts.yLabel, {
        x, y, "text-anchor": "middle", "font-size": "12", fill: axisColor,
        transform: `rotate(-90 ${x} ${y})`,
      }),
    );
  }
  return { sx, sy, body };
}

function legend(labels: string[], width: number): string[] {
  const out: string[] = [];
  let y = MARGIN.top + 14;
  const x = width - MARGIN.right - 130;
  labels.forEach((label, i) => {
    out.push(
      el("line", {
        x1: x, y1: y - 4, x2: x + 18, y2: y - 4,
        stroke: PALETTE[i % PALETTE.length]!, "stroke-width": "2",
      }),
      text(label, { x: x + 24, y, "font-size": "11", fill: "#222222" }),
    );
    y += 15;
  });
  return out;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) throw new SchemaError(`non-finite value in series: ${v}`);
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

export function convergenceCurves(series: Series[], window: number): { label: string; curve: Curve }[] {
  if (series.length === 0) throw new SchemaError("need at least one series");
  const n = series[0]!.values.length;
  if (n === 0) throw new SchemaError("empty series");
  for (const s of series) {
    if (s.values.length !== n) {
      throw new SchemaError(`series ${s.label} has ${s.values.length} steps, expected ${n}`);
    }
  }
  return series.map((s) => {
    const y = runningMean(s.values, Math.min(window, n));
    return { label: s.label, curve: { x: y.map((_, t) => t), y } };
  });
}

export function convergenceSvg(series: Series[], window = 100, opts: FigureOptions = {}): string {
  const curves = convergenceCurves(series, window);
  const width = opts.width ?? 640;
  const height = opts.height ?? 400;
  let lo = Infinity;
  let hi = -Infinity;
  for (const c of curves) {
    const [a, b] = extent(c.curve.y);
    lo = Math.min(lo, a);
    hi = Math.max(hi, b);
  }
  const n = curves[0]!.curve.x.length;
  const f = frame([0, Math.max(1, n - 1)], padded(lo, hi), width, height, {
    xLabel: "step",
    yLabel: "running mean cost",
    ...opts,
  });
  curves.forEach((c, i) => {
    f.body.push(
      el("polyline", {
        points: polylinePoints(c.curve.x.map(f.sx), c.curve.y.map(f.sy)),
        fill: "none",
        stroke: PALETTE[i % PALETTE.length]!,
        "stroke-width": "1.5",
      }),
    );
  });
  f.body.push(...legend(curves.map((c) => c.label), width));
  return svgDocument(width, height, f.body);
}

export function cdfCurves(series: Series[]): { label: string; curve: Curve }[] {
  if (series.length === 0) throw new SchemaError("need at least one series");
  for (const s of series) {
    if (s.values.length === 0) throw new SchemaError(`series ${s.label} has no samples`);
  }
  return series.map((s) => ({ label: s.label, curve: ecdf(s.values) }));
}

export function cdfSvg(series: Series[], opts: FigureOptions = {}): string {
  const curves = cdfCurves(series);
  const width = opts.width ?? 640;
  const height = opts.height ?? 400;
  let lo = Infinity;
  let hi = -Infinity;
  for (const c of curves) {
    const [a, b] = extent(c.curve.x);
    lo = Math.min(lo, a);
    hi = Math.max(hi, b);
  }
  const f = frame(padded(lo, hi), [0, 1], width, height, {
    xLabel: "sample value",
    yLabel: "empirical CDF",
    ...opts,
  });
  curves.forEach((c, i) => {
    f.body.push(
      el("polyline", {
        points: polylinePoints(c.curve.x.map(f.sx), c.curve.y.map(f.sy)),
        fill: "none",
        stroke: PALETTE[i % PALETTE.length]!,
        "stroke-width": "1.5",
      }),
    );
  });
  f.body.push(...legend(curves.map((c) => c.label), width));
  return svgDocument(width, height, f.body);
}
