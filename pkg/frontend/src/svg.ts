/** Minimal deterministic SVG writer.
 *
 * Attributes serialize in insertion order and coordinates go through one
 * fixed formatter, so equal inputs give byte-equal documents. Nothing
 * here reads the clock or the environment.
 */

export type Attrs = Record<string, string | number>;

export function fmt(v: number): string {
  if (!Number.isFinite(v)) throw new RangeError(`non-finite coordinate: ${v}`);
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

/** Tick labels: shortest exact decimal, no exponent notation for axis use. */
export function labelNumber(v: number): string {
  if (Number.isInteger(v) && Math.abs(v) < 1e15) return String(v);
  const s = String(v);
  if (!s.includes("e")) return s;
  return v.toFixed(12).replace(/0+$/, "").replace(/\.$/, "");
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function el(tag: string, attrs: Attrs, children: string[] = []): string {
  const parts = [`<${tag}`];
  for (const [k, v] of Object.entries(attrs)) {
    const text = typeof v === "number" ? fmt(v) : v;
    parts.push(` ${k}="${esc(text)}"`);
  }
  if (children.length === 0) {
    parts.push("/>");
  } else {
    parts.push(">", ...children, `</${tag}>`);
  }
  return parts.join("");
}

export function text(content: string, attrs: Attrs): string {
  return el("text", attrs, [esc(content)]);
}

export function polylinePoints(xs: number[], ys: number[]): string {
  if (xs.length !== ys.length) throw new RangeError("coordinate lengths differ");
  const pts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    pts.push(`${fmt(xs[i]!)},${fmt(ys[i]!)}`);
  }
  return pts.join(" ");
}

export function document(width: number, height: number, children: string[]): string {
  const head =
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`;
  return [head, ...children, "</svg>", ""].join("\n");
}
