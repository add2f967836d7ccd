/**
 * Figure recipes: each maps one study figure onto the artifacts of a named
 * scenario from a run report and assembles a deterministic multi-panel SVG.
 * No metric is recomputed here; rendering consumes CSV output only.
 */

import { basename } from "path";

import { column, denseColumn, readMatrix, readTable, readWignerHeader } from "./csv.js";
import { RunReport, artifact, artifacts } from "./report.js";
import {
  HeatLayer,
  Panel,
  RenderError,
  assemble,
  dataRange,
  downsample,
  heatLayers,
  hline,
  legend,
  marker,
  panel,
  seriesPath,
} from "./svg.js";
import { COLOR_GAIN, COLOR_LOSS, HEATMAP_MAX_CELLS, SERIES_COLORS } from "./style.js";

export interface FigureRecipe {
  name: string;
  scenario: string;
  render: (report: RunReport) => string;
}

/** Stride-decimate long series for readable, bounded-size SVGs. */
function thin<T>(xs: number[], ys: T[], maxPoints = 5000): [number[], T[]] {
  if (xs.length <= maxPoints) return [xs, ys];
  const stride = Math.ceil(xs.length / maxPoints);
  const xo: number[] = [];
  const yo: T[] = [];
  for (let i = 0; i < xs.length; i += stride) {
    xo.push(xs[i]);
    yo.push(ys[i]);
  }
  return [xo, yo];
}

function timeSeriesPanel(
  col: number,
  row: number,
  title: string,
  yLabel: string,
  t: number[],
  series: { ys: (number | null)[]; color: string; dash?: string; label?: string }[],
): Panel {
  const yr = dataRange(series.map((s) => s.ys));
  const p = panel(col, row, title, "t / tau", yLabel, [t[0], t[t.length - 1]], yr);
  for (const s of series) {
    const [tt, yy] = thin(t, s.ys);
    seriesPath(p, tt, yy, s.color, { dash: s.dash });
  }
  const labelled = series.filter((s) => s.label);
  if (labelled.length) {
    legend(
      p,
      labelled.map((s) => [s.label!, s.color]),
      labelled.map((s) => s.dash ?? ""),
    );
  }
  return p;
}

// ---------------------------------------------------------------------------

function fig2(report: RunReport): string {
  const lowPath = artifact(report, "fig2", "trajectory_E100.csv");
  const highPath = artifact(report, "fig2", "trajectory_E500.csv");
  const scanPath = artifact(report, "fig2", "amplitude_scan.csv");
  const low = readTable(lowPath);
  const high = readTable(highPath);
  const scan = readTable(scanPath);

  const tL = denseColumn(low, "t", lowPath);
  const tH = denseColumn(high, "t", highPath);
  const panels: Panel[] = [];
  panels.push(
    timeSeriesPanel(0, 0, "(a) decaying oscillation, E = 100", "q_j", tL, [
      { ys: column(low, "q2", lowPath), color: COLOR_GAIN, label: "gain (q2)" },
      { ys: column(low, "q1", lowPath), color: COLOR_LOSS, label: "loss (q1)" },
    ]),
    timeSeriesPanel(1, 0, "(b) self-sustained oscillation, E = 500", "q_j", tH, [
      { ys: column(high, "q2", highPath), color: COLOR_GAIN },
      { ys: column(high, "q1", highPath), color: COLOR_LOSS },
    ]),
  );

  // (c) phase portrait of the gain oscillator over the trailing quarter
  const q2 = denseColumn(high, "q2", highPath);
  const p2 = denseColumn(high, "p2", highPath);
  const start = Math.floor(q2.length * 0.75);
  const qTail = q2.slice(start);
  const pTail = p2.slice(start);
  const pc = panel(
    0,
    1,
    "(c) phase portrait, E = 500",
    "q2",
    "p2",
    dataRange([qTail]),
    dataRange([pTail]),
  );
  seriesPath(pc, qTail, pTail, COLOR_GAIN, { width: 0.8 });
  panels.push(pc);

  const drives = denseColumn(scan, "E", scanPath);
  const a1 = column(scan, "A1", scanPath);
  const a2 = column(scan, "A2", scanPath);
  const pd = panel(1, 1, "(d) amplitude vs drive", "E", "A_j",
    [drives[0], drives[drives.length - 1]], dataRange([a1, a2]));
  seriesPath(pd, drives, a2, COLOR_GAIN);
  seriesPath(pd, drives, a1, COLOR_LOSS);
  for (let i = 0; i < drives.length; i++) {
    if (a2[i] !== null) marker(pd, drives[i], a2[i]!, COLOR_GAIN, 1.5);
    if (a1[i] !== null) marker(pd, drives[i], a1[i]!, COLOR_LOSS, 1.5);
  }
  legend(pd, [["gain (A2)", COLOR_GAIN], ["loss (A1)", COLOR_LOSS]]);
  panels.push(pd);
  return assemble(panels, 2, 2);
}

function fig3(report: RunReport): string {
  const paths = artifacts(report, "fig3", /stability_gamma_m1_.*\.csv$/).sort();
  if (paths.length === 0) throw new RenderError("fig3: no stability scans in report");
  const series: { xs: number[]; ys: (number | null)[]; label: string }[] = [];
  for (const path of paths) {
    const t = readTable(path);
    const label = basename(path).replace("stability_gamma_m1_", "gamma_m1 = ").replace(".csv", "");
    series.push({
      xs: denseColumn(t, "E", path),
      ys: column(t, "max_re_eig", path),
      label,
    });
  }
  const xr: [number, number] = [
    Math.min(...series.map((s) => s.xs[0])),
    Math.max(...series.map((s) => s.xs[s.xs.length - 1])),
  ];
  const p = panel(0, 0, "stability of the fixed point", "E", "max Re eig(A)",
    xr, dataRange(series.map((s) => s.ys)));
  series.forEach((s, i) => seriesPath(p, s.xs, s.ys, SERIES_COLORS[i % SERIES_COLORS.length]));
  hline(p, 0.0, "#888888");
  legend(p, series.map((s, i) => [s.label, SERIES_COLORS[i % SERIES_COLORS.length]]));
  return assemble([p], 1, 1);
}

function metricPanels(
  report: RunReport,
  scenario: string,
  specs: { suffix: string; label: string; dash?: string }[],
  columnsWanted: { name: string; title: string; yLabel: string }[],
): string {
  const loaded = specs.map((s) => {
    const path = artifact(report, scenario, s.suffix);
    return { ...s, path, table: readTable(path) };
  });
  const panels: Panel[] = [];
  columnsWanted.forEach((cw, row) => {
    const t0 = denseColumn(loaded[0].table, "t", loaded[0].path);
    panels.push(
      timeSeriesPanel(0, row, cw.title, cw.yLabel, t0,
        loaded.map((l, i) => ({
          ys: column(l.table, cw.name, l.path),
          color: SERIES_COLORS[i % SERIES_COLORS.length],
          dash: l.dash,
          label: l.label,
        }))),
    );
  });
  return assemble(panels, 1, columnsWanted.length);
}

function fig4(report: RunReport): string {
  return metricPanels(
    report,
    "fig4",
    [
      { suffix: "metrics_E500.csv", label: "E = 500", dash: "4,3" },
      { suffix: "metrics_E600.csv", label: "E = 600" },
    ],
    [
      { name: "S_p", title: "(a) quantum phase synchronization", yLabel: "S_p" },
      { name: "E_n", title: "(b) entanglement dynamics", yLabel: "E_n" },
    ],
  );
}

interface WignerKey {
  drive: number;
  time: number;
  osc: number;
  path: string;
}

function wignerKeys(report: RunReport, scenario: string): WignerKey[] {
  const paths = artifacts(report, scenario, /wigner_E[^/]*_t[^/]*_m[12]\.csv$/);
  const out: WignerKey[] = [];
  for (const path of paths) {
    const m = basename(path).match(/^wigner_E(.+)_t(.+)_m([12])\.csv$/);
    if (!m) continue;
    out.push({ drive: Number(m[1]), time: Number(m[2]), osc: Number(m[3]), path });
  }
  if (out.length === 0) throw new RenderError(`${scenario}: no Wigner artifacts in report`);
  return out;
}

function wignerPanel(col: number, row: number, title: string, keys: WignerKey[]): Panel {
  const layers: HeatLayer[] = [];
  let qLo = Infinity;
  let qHi = -Infinity;
  let pLo = Infinity;
  let pHi = -Infinity;
  for (const key of keys.sort((a, b) => a.osc - b.osc)) {
    const header = readWignerHeader(key.path.replace(/\.csv$/, ".hdr.json"));
    const values = downsample(readMatrix(key.path), HEATMAP_MAX_CELLS);
    layers.push({
      values,
      qMin: header.q_min,
      qMax: header.q_max,
      pMin: header.p_min,
      pMax: header.p_max,
      color: key.osc === 2 ? COLOR_GAIN : COLOR_LOSS,
    });
    qLo = Math.min(qLo, header.q_min);
    qHi = Math.max(qHi, header.q_max);
    pLo = Math.min(pLo, header.p_min);
    pHi = Math.max(pHi, header.p_max);
  }
  const p = panel(col, row, title, "dq", "dp", [qLo, qHi], [pLo, pHi]);
  heatLayers(p, layers);
  return p;
}

function fig5(report: RunReport): string {
  const keys = wignerKeys(report, "fig5");
  const drives = [...new Set(keys.map((k) => k.drive))].sort((a, b) => a - b);
  const cols = Math.min(4, drives.length);
  const rows = Math.ceil(drives.length / cols);
  const panels = drives.map((d, i) =>
    wignerPanel(i % cols, Math.floor(i / cols), `E = ${d}`,
      keys.filter((k) => k.drive === d)),
  );
  return assemble(panels, cols, rows);
}

function fig6(report: RunReport): string {
  const keys = wignerKeys(report, "fig6");
  const times = [...new Set(keys.map((k) => k.time))].sort((a, b) => a - b);
  const panels = times.map((t, i) =>
    wignerPanel(i, 0, `t = ${t}`, keys.filter((k) => k.time === t)),
  );
  return assemble(panels, times.length, 1);
}

function fig7(report: RunReport): string {
  const paths = artifacts(report, "fig7", /metrics_E[^/]*\.csv$/)
    .sort((a, b) => Number(basename(a).match(/E([\d.]+)/)![1]) - Number(basename(b).match(/E([\d.]+)/)![1]));
  if (paths.length === 0) throw new RenderError("fig7: no metric series in report");
  const panels = paths.map((path, i) => {
    const t = readTable(path);
    const label = basename(path).replace("metrics_", "").replace(".csv", "");
    return timeSeriesPanel(0, i, `fidelity, ${label}`, "f",
      denseColumn(t, "t", path),
      [{ ys: column(t, "f", path), color: SERIES_COLORS[i % SERIES_COLORS.length] }]);
  });
  return assemble(panels, 1, panels.length);
}

function fig8(report: RunReport): string {
  const path = artifact(report, "fig8", "mismatch_sweep.csv");
  const t = readTable(path);
  const deltas = denseColumn(t, "delta_omega", path);
  const drives = denseColumn(t, "E", path);
  const sp = column(t, "S_p_avg", path);
  const en = column(t, "E_n_avg", path);
  const uniq = [...new Set(deltas)].sort((a, b) => a - b);
  const xr: [number, number] = [Math.min(...drives), Math.max(...drives)];
  const pa = panel(0, 0, "(a) time-averaged S_p", "E", "<S_p>", xr, dataRange([sp]));
  const pb = panel(0, 1, "(b) time-averaged E_n", "E", "<E_n>", xr, dataRange([en]));
  uniq.forEach((delta, i) => {
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    const xs: number[] = [];
    const ysp: (number | null)[] = [];
    const yen: (number | null)[] = [];
    for (let r = 0; r < deltas.length; r++) {
      if (deltas[r] !== delta) continue;
      xs.push(drives[r]);
      ysp.push(sp[r]);
      yen.push(en[r]);
    }
    seriesPath(pa, xs, ysp, color);
    seriesPath(pb, xs, yen, color);
    xs.forEach((x, k) => {
      if (ysp[k] !== null) marker(pa, x, ysp[k]!, color, 1.8);
      if (yen[k] !== null) marker(pb, x, yen[k]!, color, 1.8);
    });
  });
  legend(pa, uniq.map((d, i) => [
    `mismatch ${(100 * d).toFixed(1)}%`, SERIES_COLORS[i % SERIES_COLORS.length],
  ]));
  return assemble([pa, pb], 1, 2);
}

function fig9(report: RunReport): string {
  const paths = artifacts(report, "fig9", /metrics_n[^/]*\.csv$/)
    .sort((a, b) => Number(basename(a).match(/n([\d.]+)/)![1]) - Number(basename(b).match(/n([\d.]+)/)![1]));
  if (paths.length === 0) throw new RenderError("fig9: no thermal metric series in report");
  const loaded = paths.map((path) => ({
    path,
    table: readTable(path),
    label: basename(path).replace("metrics_n", "n = ").replace(".csv", ""),
  }));
  const t0 = denseColumn(loaded[0].table, "t", loaded[0].path);
  const panels = [
    timeSeriesPanel(0, 0, "(a) phase synchronization vs temperature", "S_p", t0,
      loaded.map((l, i) => ({
        ys: column(l.table, "S_p", l.path),
        color: SERIES_COLORS[i % SERIES_COLORS.length],
        label: l.label,
      }))),
    timeSeriesPanel(0, 1, "(b) entanglement vs temperature", "E_n", t0,
      loaded.map((l, i) => ({
        ys: column(l.table, "E_n", l.path),
        color: SERIES_COLORS[i % SERIES_COLORS.length],
      }))),
  ];
  return assemble(panels, 1, 2);
}

export const RECIPES: Map<string, FigureRecipe> = new Map(
  (
    [
      ["fig2", fig2],
      ["fig3", fig3],
      ["fig4", fig4],
      ["fig5", fig5],
      ["fig6", fig6],
      ["fig7", fig7],
      ["fig8", fig8],
      ["fig9", fig9],
    ] as [string, (r: RunReport) => string][]
  ).map(([name, render]) => [name, { name, scenario: name, render }]),
);
