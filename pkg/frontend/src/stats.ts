/**
 * The statistics the figures re-derive from the CSVs.
 *
 * These mirror the simulator's conventions exactly (same KS sups, same
 * per-checkpoint standard errors, same weighted log-log fit), so the
 * recomputed values must match the summary JSON to 1e-9; the renderers
 * enforce that instead of trusting either side.
 */

export function arcsineCdf(z: number): number {
  if (z < 0 || z > 1) throw new Error(`arcsine CDF domain is [0,1], got ${z}`);
  return (2.0 / Math.PI) * Math.asin(Math.sqrt(z));
}

/** One-sample KS statistic, both one-sided sups, right-continuous ECDF. */
export function ksDistance(sample: number[], cdf: (z: number) => number): number {
  if (sample.length === 0) throw new Error("KS distance of an empty sample");
  const x = [...sample].sort((a, b) => a - b);
  const m = x.length;
  let dPlus = -Infinity;
  let dMinus = -Infinity;
  for (let i = 0; i < m; i++) {
    const f = cdf(x[i]);
    dPlus = Math.max(dPlus, (i + 1) / m - f);
    dMinus = Math.max(dMinus, f - i / m);
  }
  return Math.max(dPlus, dMinus);
}

export function mean(xs: number[]): number {
  return xs.reduce((a, b) => a + b, 0) / xs.length;
}

function sampleStd(xs: number[]): number {
  const mu = mean(xs);
  const ss = xs.reduce((a, b) => a + (b - mu) * (b - mu), 0);
  return Math.sqrt(ss / (xs.length - 1));
}

/** Per-checkpoint statistic and standard error, matching the simulator. */
export function statWithSe(t: number[], statistic: string): [number, number] {
  const m = t.length;
  if (statistic === "rms") {
    const s2 = t.map((v) => v * v);
    const stat = Math.sqrt(mean(s2));
    const se = stat > 0 ? sampleStd(s2) / Math.sqrt(m) / (2 * stat) : 0.0;
    return [stat, se];
  }
  if (statistic === "mean-abs") {
    const a = t.map(Math.abs);
    return [mean(a), sampleStd(a) / Math.sqrt(m)];
  }
  throw new Error(`unsupported growth statistic '${statistic}' in the figure layer`);
}

export interface LoglogFit {
  slope: number;
  intercept: number;
}

/** Weighted LS of log y on log x; falls back to OLS when any se is 0. */
export function loglogFit(x: number[], y: number[], ySe?: number[]): LoglogFit {
  if (x.length < 2) throw new Error("loglogFit needs >= 2 points");
  const lx = x.map(Math.log);
  const ly = y.map(Math.log);
  let w = lx.map(() => 1.0);
  if (ySe && ySe.every((s, i) => s > 0 && y[i] > 0)) {
    w = ySe.map((s, i) => (y[i] / s) ** 2);
  }
  const sw = w.reduce((a, b) => a + b, 0);
  const mx = w.reduce((a, b, i) => a + b * lx[i], 0) / sw;
  const my = w.reduce((a, b, i) => a + b * ly[i], 0) / sw;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < lx.length; i++) {
    sxx += w[i] * (lx[i] - mx) * (lx[i] - mx);
    sxy += w[i] * (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx === 0) throw new Error("loglogFit needs distinct x values");
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx };
}
