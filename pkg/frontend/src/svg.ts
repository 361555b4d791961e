/**
 * Minimal deterministic SVG canvas: fixed size, fixed monospace font, no
 * timestamps or generated ids, coordinates rounded to 1/100 px.  Figures
 * built from equal inputs are byte-identical.
 */

export const WIDTH = 840;
export const HEIGHT = 560;
export const MARGIN = { left: 72, right: 24, top: 40, bottom: 64 };

const FONT = 'font-family="DejaVu Sans Mono, monospace"';

function r(v: number): string {
  return (Math.round(v * 100) / 100).toString();
}

export class Canvas {
  private parts: string[] = [];

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#444", width = 1, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${r(x1)}" y1="${r(y1)}" x2="${r(x2)}" y2="${r(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`,
    );
  }

  polyline(pts: Array<[number, number]>, stroke: string, width = 1.5): void {
    const body = pts.map(([x, y]) => `${r(x)},${r(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${body}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  circle(x: number, y: number, radius: number, fill: string): void {
    this.parts.push(`<circle cx="${r(x)}" cy="${r(y)}" r="${r(radius)}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, stroke = "none"): void {
    this.parts.push(
      `<rect x="${r(x)}" y="${r(y)}" width="${r(w)}" height="${r(h)}" fill="${fill}" stroke="${stroke}"/>`,
    );
  }

  text(x: number, y: number, s: string, size = 13, anchor = "start", fill = "#111"): void {
    const esc = s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
    this.parts.push(
      `<text x="${r(x)}" y="${r(y)}" font-size="${size}" text-anchor="${anchor}" fill="${fill}" ${FONT}>${esc}</text>`,
    );
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}">\n<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export type Scale = (v: number) => number;

export function linScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  return (v) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0);
}

export function niceTicks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1;
  const step0 = span / Math.max(count - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= count - 1) ?? 10 * mag;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

export function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-12); Math.pow(10, e) <= hi * (1 + 1e-12); e++) {
    out.push(Math.pow(10, e));
  }
  return out;
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 10000 || a < 0.001) return v.toExponential(0);
  return Number(v.toPrecision(4)).toString();
}

/** Blue -> yellow ramp for heatmap cells, t in [0, 1]. */
export function rampColor(t: number): string {
  const c = Math.max(0, Math.min(1, t));
  const rch = Math.round(40 + 215 * c);
  const g = Math.round(50 + 180 * c);
  const b = Math.round(140 - 110 * c);
  return `rgb(${rch},${g},${b})`;
}
