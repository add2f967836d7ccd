/**
 * Figure rendering CLI:
 *
 *   epomc-render render --report out/report.json --fig fig4 --out fig4.svg
 *
 * Exit codes: 0 rendered, 1 render failure (missing artifacts, empty
 * series), 2 usage error.  Output files are written atomically; nothing is
 * written when rendering fails.
 */

import { mkdirSync, renameSync, writeFileSync } from "fs";
import { dirname, join } from "path";

import { RECIPES } from "./recipes.js";
import { loadReport } from "./report.js";

function usage(): never {
  process.stderr.write(
    "usage: epomc-render render --report <report.json> --fig <name> --out <path>\n" +
      `figures: ${[...RECIPES.keys()].join(", ")}\n`,
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv.length === 0 || argv[0] !== "render") usage();
  const opts = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) usage();
    opts.set(key.slice(2), value);
  }
  const reportPath = opts.get("report");
  const figName = opts.get("fig");
  const outPath = opts.get("out");
  if (!reportPath || !figName || !outPath) usage();

  const recipe = RECIPES.get(figName);
  if (!recipe) {
    process.stderr.write(`error: unknown figure '${figName}' (have: ${[...RECIPES.keys()].join(", ")})\n`);
    return 2;
  }
  try {
    const report = loadReport(reportPath);
    const svg = recipe.render(report);
    mkdirSync(dirname(outPath) || ".", { recursive: true });
    const tmp = join(dirname(outPath) || ".", `.${Date.now()}-${process.pid}.tmp`);
    writeFileSync(tmp, svg);
    renameSync(tmp, outPath);
    process.stdout.write(`wrote ${outPath} (${svg.length} bytes)\n`);
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
