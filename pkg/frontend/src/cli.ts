/** Command line entry: render figures from trace CSVs.
 *
 *   cli.js convergence mean.csv --out fig.svg [--window 100]
 *   cli.js cdf compare_cdf.csv --out fig.svg
 *   cli.js cdf compare_cdf.csv --json
 *
 * A wide trace contributes one series per policy column (step, run_mean
 * and reduced are bookkeeping, not policies); a policy,sample table
 * contributes one series per policy. Exit codes: 0 ok, 2 bad input.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { SchemaError, isSampleCsv, parseNumericCsv, parseSampleCsv, policyColumns } from "./csv.js";
import { cdfCurves, cdfSvg, convergenceCurves, convergenceSvg, type Series } from "./figures.js";

const USAGE = `usage: cli.js <convergence|cdf> <csv...> [--out FILE.svg] [--json]
                [--window N] [--title TEXT]`;

class UsageError extends Error {}

function gatherSeries(paths: string[], verb: "convergence" | "cdf"): Series[] {
  const series: Series[] = [];
  for (const path of paths) {
    const text = readFileSync(path, "utf-8");
    const stem = basename(path).replace(/\.[^.]*$/, "");
    const prefix = paths.length > 1 ? `${stem}.` : "";
    if (verb === "cdf" && isSampleCsv(text)) {
      for (const [label, values] of parseSampleCsv(text)) {
        series.push({ label: `${prefix}${label}`, values });
      }
      continue;
    }
    const table = parseNumericCsv(text);
    for (const name of policyColumns(table)) {
      series.push({ label: `${prefix}${name}`, values: table.columns.get(name)! });
    }
  }
  return series;
}

export function main(argv: string[]): number {
  try {
    const verb = argv[0];
    if (verb !== "convergence" && verb !== "cdf") {
      throw new UsageError(`unknown verb: ${verb ?? "(none)"}`);
    }
    const { values: opts, positionals } = parseArgs({
      args: argv.slice(1),
      allowPositionals: true,
      options: {
        out: { type: "string" },
        json: { type: "boolean", default: false },
        window: { type: "string", default: "100" },
        title: { type: "string" },
      },
    });
    if (positionals.length === 0) throw new UsageError("no input CSVs given");
    if (!opts.out && !opts.json) throw new UsageError("need --out FILE.svg or --json");
    const window = Number(opts.window);
    if (!Number.isInteger(window) || window < 1) {
      throw new UsageError(`--window must be a positive integer, got ${opts.window}`);
    }

    const series = gatherSeries(positionals, verb);
    const figOpts = opts.title ? { title: opts.title } : {};
    if (opts.out) {
      const svg =
        verb === "convergence"
          ? convergenceSvg(series, window, figOpts)
          : cdfSvg(series, figOpts);
      writeFileSync(opts.out, svg, "utf-8");
      process.stdout.write(`wrote ${opts.out}\n`);
    }
    if (opts.json) {
      const curves =
        verb === "convergence" ? convergenceCurves(series, window) : cdfCurves(series);
      const payload = {
        curves: curves.map((c) => ({ label: c.label, x: c.curve.x, y: c.curve.y })),
      };
      process.stdout.write(JSON.stringify(payload) + "\n");
    }
    return 0;
  } catch (err) {
    const code = (err as NodeJS.ErrnoException).code ?? "";
    if (
      err instanceof UsageError ||
      err instanceof SchemaError ||
      err instanceof RangeError ||
      code === "ENOENT" ||
      code.startsWith("ERR_PARSE_ARGS")
    ) {
      process.stderr.write(`error: ${(err as Error).message}\n${USAGE}\n`);
      return 2;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
