/**
 * The four figure kinds, each a pure function of CSV/JSON inputs.
 *
 * Every renderer re-derives its plotted arrays from the CSV and checks
 * them against the summary JSON's statistics to 1e-9 before drawing;
 * a mismatch is an error, never silently re-annotated.  The config hash
 * carried by the inputs is stamped into the figure margin.  Figures are
 * deterministic: fixed canvas, fixed fonts, no timestamps.
 */

import * as fs from "fs";
import * as path from "path";

import { CsvTable, column, readCsv, readJson } from "./csv";
import { arcsineCdf, ksDistance, loglogFit, statWithSe } from "./stats";
import {
  Canvas, HEIGHT, MARGIN, WIDTH, fmtTick, linScale, logScale, logTicks,
  niceTicks, rampColor,
} from "./svg";

const MATCH_TOL = 1e-9;

export interface FigureResult {
  out: string;
  annotations: Record<string, string | number>;
}

function writeSvg(outPath: string, svg: string): void {
  fs.mkdirSync(path.dirname(path.resolve(outPath)), { recursive: true });
  fs.writeFileSync(outPath, svg);
}

function stamp(c: Canvas, title: string, meta: Record<string, string>): void {
  c.text(MARGIN.left, 24, title, 15);
  const hash = meta["config"] ?? "unknown";
  const seed = meta["seed"] ?? "?";
  c.text(WIDTH - MARGIN.right, HEIGHT - 12, `config=${hash} seed=${seed}`, 11, "end", "#666");
}

function frame(c: Canvas): [number, number, number, number] {
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  c.line(x0, y0, x1, y0);
  c.line(x0, y0, x0, y1);
  return [x0, x1, y0, y1];
}

function lastCheckpointSample(ens: CsvTable): { n: number; values: number[] } {
  const ns = column(ens, "n");
  const ts = column(ens, "T");
  const n = Math.max(...ns);
  const values: number[] = [];
  for (let i = 0; i < ns.length; i++) {
    if (ns[i] === n) values.push(ts[i] / n);
  }
  return { n, values };
}

/** Empirical CDF of T_N/N at the final checkpoint against the arcsine curve. */
export function cdfOverlay(ensemblePath: string, summaryPath: string,
                           outPath: string): FigureResult {
  const ens = readCsv(ensemblePath, ["trial", "n", "T"]);
  const summary = readJson(summaryPath);
  const { n, values } = lastCheckpointSample(ens);
  const ks = ksDistance(values, arcsineCdf);
  const reported = summary?.arcsine?.ks_distance;
  if (typeof reported !== "number") {
    throw new Error(`summary ${summaryPath} has no arcsine.ks_distance field`);
  }
  if (Math.abs(ks - reported) > MATCH_TOL) {
    throw new Error(
      `re-derived KS ${ks} disagrees with summary ks_distance ${reported} beyond 1e-9`);
  }

  const sorted = [...values].sort((a, b) => a - b);
  const m = sorted.length;
  const c = new Canvas();
  const [x0, x1, y0, y1] = frame(c);
  const sx = linScale(0, 1, x0, x1);
  const sy = linScale(0, 1, y0, y1);
  for (const t of niceTicks(0, 1, 6)) {
    c.line(sx(t), y0, sx(t), y0 + 5);
    c.text(sx(t), y0 + 20, fmtTick(t), 12, "middle");
    c.line(x0 - 5, sy(t), x0, sy(t));
    c.text(x0 - 9, sy(t) + 4, fmtTick(t), 12, "end");
  }
  c.text((x0 + x1) / 2, HEIGHT - 28, `T_N / N at N = ${n}`, 13, "middle");

  // arcsine reference
  const ref: Array<[number, number]> = [];
  for (let i = 0; i <= 400; i++) {
    const z = i / 400;
    ref.push([sx(z), sy(arcsineCdf(z))]);
  }
  c.polyline(ref, "#c22", 2);

  // empirical CDF step curve
  const steps: Array<[number, number]> = [[sx(0), sy(0)]];
  for (let i = 0; i < m; i++) {
    steps.push([sx(sorted[i]), sy(i / m)]);
    steps.push([sx(sorted[i]), sy((i + 1) / m)]);
  }
  steps.push([sx(1), sy(1)]);
  c.polyline(steps, "#1453a0", 1.5);

  // sup-gap marker
  let gapAt = 0;
  let gapLo = 0;
  let gapHi = 0;
  for (let i = 0; i < m; i++) {
    const f = arcsineCdf(sorted[i]);
    for (const e of [(i + 1) / m, i / m]) {
      if (Math.abs(e - f) >= gapHi - gapLo) {
        gapAt = sorted[i];
        gapLo = Math.min(e, f);
        gapHi = Math.max(e, f);
      }
    }
  }
  c.line(sx(gapAt), sy(gapLo), sx(gapAt), sy(gapHi), "#111", 1.5, "4,3");
  const ksLabel = `KS distance = ${ks.toFixed(6)}`;
  c.text(sx(gapAt) + 8, (sy(gapLo) + sy(gapHi)) / 2, ksLabel, 13);
  c.text(x1, y1 - 8, `M = ${m} trials`, 12, "end", "#444");
  stamp(c, "empirical law of T_N/N vs arcsine CDF", ens.meta);
  writeSvg(outPath, c.render());
  return { out: outPath, annotations: { ks_distance: ks, label: ksLabel, n, trials: m } };
}

/** Log-log growth of a per-checkpoint statistic with its fitted slope. */
export function loglogFitFigure(ensemblePath: string, summaryPath: string,
                                outPath: string): FigureResult {
  const ens = readCsv(ensemblePath, ["trial", "n", "T"]);
  const summary = readJson(summaryPath);
  const growth = summary?.growth;
  if (!growth) throw new Error(`summary ${summaryPath} has no growth section`);
  const statistic: string = growth.statistic;

  const ns = column(ens, "n");
  const ts = column(ens, "T");
  const checkpoints: number[] = summary.checkpoints;
  const stats: number[] = [];
  const ses: number[] = [];
  for (const n of checkpoints) {
    const t = ts.filter((_, i) => ns[i] === n);
    if (t.length === 0) throw new Error(`no ensemble rows for checkpoint ${n}`);
    const [s, se] = statWithSe(t, statistic);
    stats.push(s);
    ses.push(se);
  }
  for (let j = 0; j < checkpoints.length; j++) {
    const reported = growth.table[j][1];
    if (Math.abs(stats[j] - reported) > MATCH_TOL * Math.max(1, Math.abs(reported))) {
      throw new Error(
        `re-derived ${statistic}(${checkpoints[j]}) = ${stats[j]} disagrees with ` +
        `summary value ${reported} beyond 1e-9`);
    }
  }
  const fit = loglogFit(checkpoints, stats, ses);
  if (Math.abs(fit.slope - growth.slope) > MATCH_TOL) {
    throw new Error(
      `re-derived slope ${fit.slope} disagrees with summary slope ${growth.slope} beyond 1e-9`);
  }

  const c = new Canvas();
  const [x0, x1, y0, y1] = frame(c);
  const xlo = checkpoints[0];
  const xhi = checkpoints[checkpoints.length - 1];
  const positive = stats.filter((s) => s > 0);
  const ylo = Math.min(...positive);
  const yhi = Math.max(...positive);
  const sx = logScale(xlo, xhi, x0, x1);
  const sy = logScale(ylo, yhi, y0 - 10, y1 + 10);
  for (const t of logTicks(xlo, xhi)) {
    c.line(sx(t), y0, sx(t), y0 + 5);
    c.text(sx(t), y0 + 20, fmtTick(t), 12, "middle");
  }
  for (const t of logTicks(ylo, yhi)) {
    c.line(x0 - 5, sy(t), x0, sy(t));
    c.text(x0 - 9, sy(t) + 4, fmtTick(t), 12, "end");
  }
  c.text((x0 + x1) / 2, HEIGHT - 28, "N (log scale)", 13, "middle");

  const a = Math.exp(fit.intercept);
  c.polyline(
    [[sx(xlo), sy(a * Math.pow(xlo, fit.slope))], [sx(xhi), sy(a * Math.pow(xhi, fit.slope))]],
    "#c22", 1.5);
  for (let j = 0; j < checkpoints.length; j++) {
    if (stats[j] > 0) c.circle(sx(checkpoints[j]), sy(stats[j]), 3.5, "#1453a0");
  }
  const slopeLabel = `slope ${fit.slope.toFixed(2)}`;
  c.text(x1, y1 - 8, `${statistic}(T_N): ${slopeLabel}`, 14, "end");
  stamp(c, "growth-exponent fit", ens.meta);
  writeSvg(outPath, c.render());
  return { out: outPath, annotations: { slope: fit.slope, label: slopeLabel, statistic } };
}

/** Error-decay curve (e.g. the LLT sup error against n), log-log. */
export function decayCurve(csvPath: string, outPath: string,
                           xcol = "n", ycol = "sup_error"): FigureResult {
  const table = readCsv(csvPath, [xcol, ycol]);
  const xs = column(table, xcol);
  const ys = column(table, ycol);
  const c = new Canvas();
  const [x0, x1, y0, y1] = frame(c);
  const sx = logScale(Math.min(...xs), Math.max(...xs), x0, x1);
  const ylo = Math.min(...ys.filter((v) => v > 0));
  const yhi = Math.max(...ys);
  const sy = logScale(ylo, yhi, y0 - 10, y1 + 10);
  for (const t of logTicks(Math.min(...xs), Math.max(...xs))) {
    c.line(sx(t), y0, sx(t), y0 + 5);
    c.text(sx(t), y0 + 20, fmtTick(t), 12, "middle");
  }
  for (const t of logTicks(ylo, yhi)) {
    c.line(x0 - 5, sy(t), x0, sy(t));
    c.text(x0 - 9, sy(t) + 4, fmtTick(t), 12, "end");
  }
  c.polyline(xs.map((x, i) => [sx(x), sy(ys[i])] as [number, number]), "#1453a0", 1.5);
  xs.forEach((x, i) => c.circle(sx(x), sy(ys[i]), 3, "#1453a0"));
  const ratio = ys[ys.length - 1] / ys[0];
  const label = `${ycol}(${xs[xs.length - 1]}) / ${ycol}(${xs[0]}) = ${ratio.toFixed(4)}`;
  c.text(x1, y1 - 8, label, 13, "end");
  c.text((x0 + x1) / 2, HEIGHT - 28, `${xcol} (log scale)`, 13, "middle");
  stamp(c, `${ycol} decay`, table.meta);
  writeSvg(outPath, c.render());
  return { out: outPath, annotations: { ratio, label } };
}

/** Heatmap of the chain-sweep |Cov|/bracket ratio over two parameter axes. */
export function heatmap(sweepPath: string, outPath: string,
                        xcol = "q1", ycol = "q2", vcol = "ratio"): FigureResult {
  const table = readCsv(sweepPath, [xcol, ycol, vcol, "flagged"]);
  const xs = column(table, xcol);
  const ys = column(table, ycol);
  const vs = column(table, vcol);
  const flags = column(table, "flagged");
  const xvals = [...new Set(xs)].sort((a, b) => a - b);
  const yvals = [...new Set(ys)].sort((a, b) => a - b);
  const agg = new Map<string, number>();
  let flagged = 0;
  for (let i = 0; i < xs.length; i++) {
    if (flags[i]) flagged += 1;
    if (!Number.isFinite(vs[i])) continue;
    const key = `${xs[i]}|${ys[i]}`;
    agg.set(key, Math.max(agg.get(key) ?? -Infinity, vs[i]));
  }
  const vmax = Math.max(...agg.values());
  const vmin = Math.min(...agg.values());

  const c = new Canvas();
  const [x0, x1, y0, y1] = frame(c);
  const cw = (x1 - x0 - 60) / xvals.length;
  const ch = (y0 - y1) / yvals.length;
  for (let i = 0; i < xvals.length; i++) {
    for (let j = 0; j < yvals.length; j++) {
      const v = agg.get(`${xvals[i]}|${yvals[j]}`);
      if (v === undefined) continue;
      const t = vmax > vmin ? (v - vmin) / (vmax - vmin) : 0.5;
      c.rect(x0 + i * cw, y0 - (j + 1) * ch, cw - 1, ch - 1, rampColor(t));
      c.text(x0 + (i + 0.5) * cw, y0 - (j + 0.5) * ch + 4, v.toFixed(2), 11, "middle",
             t > 0.55 ? "#111" : "#eee");
    }
  }
  xvals.forEach((v, i) => c.text(x0 + (i + 0.5) * cw, y0 + 20, fmtTick(v), 12, "middle"));
  yvals.forEach((v, j) => c.text(x0 - 9, y0 - (j + 0.5) * ch + 4, fmtTick(v), 12, "end"));
  c.text((x0 + x1) / 2, HEIGHT - 28, xcol, 13, "middle");
  c.text(18, (y0 + y1) / 2, ycol, 13, "middle");
  // color legend
  const lx = x1 - 40;
  for (let k = 0; k < 100; k++) {
    c.rect(lx, y0 - ((k + 1) * (y0 - y1)) / 100, 16, (y0 - y1) / 100 + 0.5,
           rampColor(k / 99));
  }
  c.text(lx + 20, y1 + 12, fmtTick(vmax), 11);
  c.text(lx + 20, y0, fmtTick(vmin), 11);
  const label = `max ${vcol} = ${vmax.toFixed(3)}; flagged rows = ${flagged}`;
  c.text(x1, y1 - 8, label, 13, "end");
  stamp(c, `chain sweep: max ${vcol} per (${xcol}, ${ycol})`, table.meta);
  writeSvg(outPath, c.render());
  return { out: outPath, annotations: { vmax, vmin, flagged, label } };
}
