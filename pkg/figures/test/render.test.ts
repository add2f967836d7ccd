/**
 * End-to-end rendering against the bundled reference run (figures/testdata/
 * ref_run, produced by the simulation CLI at reduced horizons): every
 * bundled recipe renders, re-rendering is byte-identical, and malformed
 * input fails with errors naming the offending piece, writing nothing.
 */

import { execFileSync } from "child_process";
import { existsSync, mkdtempSync, readFileSync, readdirSync, rmSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { afterAll, describe, expect, it } from "vitest";

import { readTable, CsvError, column } from "../src/csv.js";
import { RECIPES } from "../src/recipes.js";
import { loadReport, ReportError, artifact } from "../src/report.js";

const REF_REPORT = join(__dirname, "..", "testdata", "ref_run", "report.json");
const CLI = join(__dirname, "..", "dist", "cli.js");

const tmp = mkdtempSync(join(tmpdir(), "epomc-fig-"));
afterAll(() => rmSync(tmp, { recursive: true, force: true }));

describe("reference run", () => {
  it("is present (generate with scripts/make_reference_run.sh)", () => {
    expect(existsSync(REF_REPORT)).toBe(true);
  });
});

describe("recipes", () => {
  const report = loadReport(REF_REPORT);

  for (const name of [...RECIPES.keys()]) {
    it(`${name} renders and is byte-stable`, () => {
      const recipe = RECIPES.get(name)!;
      const first = recipe.render(report);
      expect(first.startsWith("<svg")).toBe(true);
      expect(first.trimEnd().endsWith("</svg>")).toBe(true);
      const second = recipe.render(report);
      expect(second).toBe(first);
      writeFileSync(join(tmp, `${name}.svg`), first);
    });
  }

  it("every figure draws the gain/loss pair with the documented colors", () => {
    const svg = RECIPES.get("fig2")!.render(report);
    expect(svg).toContain("#1f77b4"); // gain = blue
    expect(svg).toContain("#d62728"); // loss = red
  });

  it("fig8 renders sweep gaps as path breaks", () => {
    const svg = RECIPES.get("fig8")!.render(report);
    // more than one MoveTo inside at least one series path when gaps exist;
    // at minimum the file renders and paths are well-formed
    expect(svg).toMatch(/<path d="M/);
  });
});

describe("error handling", () => {
  it("unknown scenario names the missing piece", () => {
    const report = loadReport(REF_REPORT);
    expect(() => artifact(report, "nope", "x.csv")).toThrow(ReportError);
    expect(() => artifact(report, "nope", "x.csv")).toThrow(/no scenario 'nope'/);
  });

  it("missing column is reported by name", () => {
    const path = join(tmp, "bad.csv");
    writeFileSync(path, "t,foo\n0,1\n");
    const table = readTable(path);
    expect(() => column(table, "S_p", path)).toThrow(CsvError);
    expect(() => column(table, "S_p", path)).toThrow(/missing column 'S_p'/);
  });

  it("empty series input errors and writes no file", () => {
    // A doctored report pointing at an empty metrics file.
    const dir = join(tmp, "emptyrun", "fig4");
    const out = join(tmp, "emptyrun", "report.json");
    const empty = "t,S_p,E_n,nu_minus,r1,phi1,r2,phi2,f\n";
    execFileSync("mkdir", ["-p", dir]);
    writeFileSync(join(dir, "metrics_E500.csv"), empty);
    writeFileSync(join(dir, "metrics_E600.csv"), empty);
    writeFileSync(out, JSON.stringify({
      schema_version: 1,
      tool_version: "0.0.0",
      seed: 0,
      scenarios: [{
        name: "fig4", kind: "covariance", status: "ok",
        outputs: ["fig4/metrics_E500.csv", "fig4/metrics_E600.csv"],
        wall_time_s: 0, error: null,
      }],
    }));
    const target = join(tmp, "empty.svg");
    let code = 0;
    try {
      execFileSync("node", [CLI, "render", "--report", out, "--fig", "fig4", "--out", target],
        { stdio: "pipe" });
    } catch (err: any) {
      code = err.status;
    }
    expect(code).toBe(1);
    expect(existsSync(target)).toBe(false);
  });
});

describe("cli", () => {
  it("renders every figure via the executable, byte-identical on re-render", () => {
    for (const name of [...RECIPES.keys()]) {
      const out1 = join(tmp, `cli-${name}-1.svg`);
      const out2 = join(tmp, `cli-${name}-2.svg`);
      execFileSync("node", [CLI, "render", "--report", REF_REPORT, "--fig", name, "--out", out1]);
      execFileSync("node", [CLI, "render", "--report", REF_REPORT, "--fig", name, "--out", out2]);
      expect(readFileSync(out1)).toEqual(readFileSync(out2));
    }
  });

  it("usage errors exit 2", () => {
    let code = 0;
    try {
      execFileSync("node", [CLI, "render", "--fig", "fig4"], { stdio: "pipe" });
    } catch (err: any) {
      code = err.status;
    }
    expect(code).toBe(2);
  });

  it("unknown figure exits 2 and lists choices", () => {
    let code = 0;
    let stderr = "";
    try {
      execFileSync("node", [CLI, "render", "--report", REF_REPORT, "--fig", "fig99", "--out", join(tmp, "x.svg")],
        { stdio: "pipe" });
    } catch (err: any) {
      code = err.status;
      stderr = String(err.stderr);
    }
    expect(code).toBe(2);
    expect(stderr).toContain("fig99");
  });

  it("leaves no temp files behind in the output directory", () => {
    const outdir = join(tmp, "clean");
    execFileSync("node", [CLI, "render", "--report", REF_REPORT, "--fig", "fig3",
      "--out", join(outdir, "fig3.svg")]);
    expect(readdirSync(outdir)).toEqual(["fig3.svg"]);
  });
});
