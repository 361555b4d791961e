#!/usr/bin/env node
/**
 * walklab-figs: batch figures from walklab CSV/JSON outputs.
 *
 *   walklab-figs cdf-overlay --ensemble ensemble.csv --summary summary.json --out fig.svg
 *   walklab-figs loglog-fit  --ensemble ensemble.csv --summary summary.json --out fig.svg
 *   walklab-figs decay-curve --csv llt.csv [--x n --y sup_error] --out fig.svg
 *   walklab-figs heatmap     --sweep sweep.csv [--x q1 --y q2 --value ratio] --out fig.svg
 *
 * The figure layer never invokes the simulator; it re-derives plotted
 * arrays from the CSVs and refuses to render if they disagree with the
 * summary JSON beyond 1e-9.  Exit codes: 0 drawn, 1 any error (missing
 * file, missing column, mismatch).
 */

import { cdfOverlay, decayCurve, heatmap, loglogFitFigure } from "./figures";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed arguments near '${key}'`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const v = flags.get(name);
  if (!v) throw new Error(`missing required flag --${name}`);
  return v;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    const out = need(flags, "out");
    let result;
    switch (command) {
      case "cdf-overlay":
        result = cdfOverlay(need(flags, "ensemble"), need(flags, "summary"), out);
        break;
      case "loglog-fit":
        result = loglogFitFigure(need(flags, "ensemble"), need(flags, "summary"), out);
        break;
      case "decay-curve":
        result = decayCurve(need(flags, "csv"), out,
                            flags.get("x") ?? "n", flags.get("y") ?? "sup_error");
        break;
      case "heatmap":
        result = heatmap(need(flags, "sweep"), out, flags.get("x") ?? "q1",
                         flags.get("y") ?? "q2", flags.get("value") ?? "ratio");
        break;
      default:
        throw new Error(
          `unknown figure kind '${command ?? ""}'; use cdf-overlay | loglog-fit | decay-curve | heatmap`);
    }
    console.log(`${result.out}: ${result.annotations["label"] ?? "drawn"}`);
    return 0;
  } catch (err) {
    console.error(`walklab-figs: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
