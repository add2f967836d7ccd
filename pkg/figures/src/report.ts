/**
 * Run-report access: figure recipes may reference only artifacts listed in
 * report.json, resolved relative to the report's directory.
 */

import { existsSync, readFileSync } from "fs";
import { dirname, join } from "path";

export class ReportError extends Error {}

export interface ScenarioEntry {
  name: string;
  kind: string;
  status: string;
  outputs: string[];
}

export interface RunReport {
  dir: string;
  scenarios: Map<string, ScenarioEntry>;
}

export function loadReport(path: string): RunReport {
  let doc: any;
  try {
    doc = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new ReportError(`cannot read report ${path}: ${(err as Error).message}`);
  }
  if (doc.schema_version !== 1 || !Array.isArray(doc.scenarios)) {
    throw new ReportError(`${path}: not a schema_version-1 run report`);
  }
  const scenarios = new Map<string, ScenarioEntry>();
  for (const s of doc.scenarios) {
    scenarios.set(s.name, {
      name: s.name,
      kind: s.kind,
      status: s.status,
      outputs: (s.outputs ?? []) as string[],
    });
  }
  return { dir: dirname(path), scenarios };
}

export function scenarioEntry(report: RunReport, name: string): ScenarioEntry {
  const entry = report.scenarios.get(name);
  if (!entry) {
    throw new ReportError(
      `report has no scenario '${name}' (have: ${[...report.scenarios.keys()].join(", ")})`,
    );
  }
  if (entry.status !== "ok") {
    throw new ReportError(`scenario '${name}' did not complete: status=${entry.status}`);
  }
  return entry;
}

/** Absolute path of a named artifact; it must be listed in the report. */
export function artifact(report: RunReport, scenario: string, suffix: string): string {
  const entry = scenarioEntry(report, scenario);
  const rel = entry.outputs.find((o) => o.endsWith(suffix));
  if (!rel) {
    throw new ReportError(
      `scenario '${scenario}' has no artifact matching '${suffix}' ` +
        `(outputs: ${entry.outputs.join(", ")})`,
    );
  }
  const path = join(report.dir, rel);
  if (!existsSync(path)) throw new ReportError(`artifact missing on disk: ${path}`);
  return path;
}

/** All artifacts of a scenario whose relative path matches the pattern. */
export function artifacts(report: RunReport, scenario: string, pattern: RegExp): string[] {
  const entry = scenarioEntry(report, scenario);
  const rel = entry.outputs.filter((o) => pattern.test(o));
  return rel.map((r) => {
    const path = join(report.dir, r);
    if (!existsSync(path)) throw new ReportError(`artifact missing on disk: ${path}`);
    return path;
  });
}
