#!/usr/bin/env node
/**
 * plots render --csv data.csv --x tau --y err_l2_Q --group n --slopes 3 --out fig.svg
 *
 * Renders log-log convergence figures from the solver's CSV output.
 * `--panel init` facets into side-by-side panels (small-step studies).
 */
import { readFileSync, writeFileSync } from "node:fs";

import { parseCsv } from "./csv.js";
import { PlotSpec, renderSvg } from "./plot.js";

interface CliArgs {
  csv: string;
  out: string;
  spec: PlotSpec;
}

export function parseArgs(argv: string[]): CliArgs {
  if (argv[0] !== "render") {
    throw new Error(`unknown command "${argv[0] ?? ""}" (expected: render)`);
  }
  const opts = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed option at "${key}"`);
    }
    opts.set(key.slice(2), argv[i + 1]);
  }
  const need = (name: string): string => {
    const v = opts.get(name);
    if (v === undefined) throw new Error(`--${name} is required`);
    return v;
  };
  const spec: PlotSpec = {
    x: need("x"),
    y: need("y").split(","),
    group: opts.get("group"),
    panel: opts.get("panel"),
    slopes: (opts.get("slopes") ?? "")
      .split(",")
      .filter((s) => s.length > 0)
      .map((s) => {
        const v = Number(s);
        if (!Number.isFinite(v)) throw new Error(`bad slope value "${s}"`);
        return v;
      }),
    width: opts.has("width") ? Number(opts.get("width")) : undefined,
    height: opts.has("height") ? Number(opts.get("height")) : undefined,
  };
  return { csv: need("csv"), out: need("out"), spec };
}

export function main(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const table = parseCsv(readFileSync(args.csv, "utf-8"));
    const svg = renderSvg(table, args.spec);
    writeFileSync(args.out, svg);
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    console.error(`render error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
