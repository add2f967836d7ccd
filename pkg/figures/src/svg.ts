/**
 * Deterministic SVG assembly: panels with axes, polyline series that break
 * at gaps (null samples), and cell-based heatmaps.  All coordinates are
 * formatted with fixed precision so identical inputs give identical bytes.
 */

import {
  AXIS_COLOR,
  FONT,
  FONT_TITLE,
  GRID_COLOR,
  MARGIN,
  PANEL_HEIGHT,
  PANEL_WIDTH,
} from "./style.js";

export class RenderError extends Error {}

const fmt = (v: number): string => {
  if (!Number.isFinite(v)) throw new RenderError(`non-finite coordinate: ${v}`);
  return v.toFixed(2).replace(/^-0\.00$/, "0.00");
};

export interface Scale {
  lo: number;
  hi: number;
  px0: number;
  px1: number;
}

export function makeScale(lo: number, hi: number, px0: number, px1: number): Scale {
  if (!(hi > lo)) {
    // degenerate data ranges render as a centered flat line
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.05 : 0.5;
    lo -= pad;
    hi += pad;
  }
  return { lo, hi, px0, px1 };
}

export const apply = (s: Scale, v: number): number =>
  s.px0 + ((v - s.lo) / (s.hi - s.lo)) * (s.px1 - s.px0);

export function dataRange(values: (number | null)[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const series of values) {
    for (const v of series) {
      if (v === null) continue;
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo === Infinity) throw new RenderError("empty series: nothing to plot");
  if (lo === hi) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.05 : 0.5;
    return [lo - pad, hi + pad];
  }
  const pad = 0.04 * (hi - lo);
  return [lo - pad, hi + pad];
}

function ticks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / (n * step);
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const start = Math.ceil(lo / s) * s;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += s) out.push(v);
  return out;
}

const tickLabel = (v: number): string => {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 10000 || a < 0.001) return v.toExponential(1);
  return Number(v.toPrecision(6)).toString();
};

export interface Panel {
  x: number;
  y: number;
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: Scale;
  yScale: Scale;
  body: string[];
}

export function panel(
  col: number,
  row: number,
  title: string,
  xLabel: string,
  yLabel: string,
  xRange: [number, number],
  yRange: [number, number],
): Panel {
  const x = col * PANEL_WIDTH;
  const y = row * PANEL_HEIGHT;
  return {
    x,
    y,
    title,
    xLabel,
    yLabel,
    xScale: makeScale(xRange[0], xRange[1], x + MARGIN.left, x + PANEL_WIDTH - MARGIN.right),
    yScale: makeScale(yRange[0], yRange[1], y + PANEL_HEIGHT - MARGIN.bottom, y + MARGIN.top),
    body: [],
  };
}

/** Polyline through the samples; null values break the path (gaps). */
export function seriesPath(
  p: Panel,
  xs: number[],
  ys: (number | null)[],
  color: string,
  opts: { dash?: string; width?: number } = {},
): void {
  if (xs.length !== ys.length) throw new RenderError("series length mismatch");
  const segments: string[] = [];
  let pen = false;
  for (let i = 0; i < xs.length; i++) {
    const v = ys[i];
    if (v === null) {
      pen = false;
      continue;
    }
    const cmd = pen ? "L" : "M";
    segments.push(`${cmd}${fmt(apply(p.xScale, xs[i]))} ${fmt(apply(p.yScale, v))}`);
    pen = true;
  }
  if (segments.length === 0) throw new RenderError("empty series: nothing to plot");
  const dash = opts.dash ? ` stroke-dasharray="${opts.dash}"` : "";
  const width = opts.width ?? 1.2;
  p.body.push(
    `<path d="${segments.join(" ")}" fill="none" stroke="${color}" stroke-width="${width}"${dash}/>`,
  );
}

export function marker(p: Panel, x: number, y: number, color: string, r = 2.2): void {
  p.body.push(
    `<circle cx="${fmt(apply(p.xScale, x))}" cy="${fmt(apply(p.yScale, y))}" r="${r}" fill="${color}"/>`,
  );
}

export function hline(p: Panel, y: number, color: string, dash = "3,3"): void {
  p.body.push(
    `<line x1="${fmt(p.xScale.px0)}" y1="${fmt(apply(p.yScale, y))}" ` +
      `x2="${fmt(p.xScale.px1)}" y2="${fmt(apply(p.yScale, y))}" ` +
      `stroke="${color}" stroke-width="0.8" stroke-dasharray="${dash}"/>`,
  );
}

export interface HeatLayer {
  /** values[i][j] with i indexing the q axis, j the p axis */
  values: number[][];
  qMin: number;
  qMax: number;
  pMin: number;
  pMax: number;
  /** base color; cell opacity scales with value/max */
  color: string;
}

/** Downsample a matrix by block-averaging to at most n cells per axis. */
export function downsample(m: number[][], maxCells: number): number[][] {
  const f = Math.max(1, Math.ceil(Math.max(m.length, m[0].length) / maxCells));
  if (f === 1) return m;
  const out: number[][] = [];
  for (let i = 0; i < m.length; i += f) {
    const row: number[] = [];
    for (let j = 0; j < m[0].length; j += f) {
      let acc = 0;
      let cnt = 0;
      for (let a = i; a < Math.min(i + f, m.length); a++) {
        for (let b = j; b < Math.min(j + f, m[0].length); b++) {
          acc += m[a][b];
          cnt += 1;
        }
      }
      row.push(acc / cnt);
    }
    out.push(row);
  }
  return out;
}

export function heatLayers(p: Panel, layers: HeatLayer[]): void {
  let peak = 0;
  for (const layer of layers) {
    for (const row of layer.values) for (const v of row) peak = Math.max(peak, v);
  }
  if (peak <= 0) throw new RenderError("empty series: heatmap has no positive values");
  for (const layer of layers) {
    const nq = layer.values.length;
    const np = layer.values[0].length;
    const dq = (layer.qMax - layer.qMin) / (nq - 1 || 1);
    const dp = (layer.pMax - layer.pMin) / (np - 1 || 1);
    const cells: string[] = [];
    for (let i = 0; i < nq; i++) {
      for (let j = 0; j < np; j++) {
        const a = layer.values[i][j] / peak;
        if (a < 0.02) continue;
        const x0 = apply(p.xScale, layer.qMin + (i - 0.5) * dq);
        const x1 = apply(p.xScale, layer.qMin + (i + 0.5) * dq);
        const y0 = apply(p.yScale, layer.pMin + (j + 0.5) * dp);
        const y1 = apply(p.yScale, layer.pMin + (j - 0.5) * dp);
        cells.push(
          `<rect x="${fmt(x0)}" y="${fmt(y0)}" width="${fmt(x1 - x0)}" ` +
            `height="${fmt(y1 - y0)}" fill="${layer.color}" fill-opacity="${a.toFixed(3)}"/>`,
        );
      }
    }
    p.body.push(`<g>${cells.join("")}</g>`);
  }
}

export function legend(p: Panel, entries: [string, string][], dash: string[] = []): void {
  const x = p.x + MARGIN.left + 8;
  let y = p.y + MARGIN.top + 6;
  entries.forEach(([label, color], i) => {
    const d = dash[i] ? ` stroke-dasharray="${dash[i]}"` : "";
    p.body.push(
      `<line x1="${x}" y1="${y}" x2="${x + 18}" y2="${y}" stroke="${color}" stroke-width="1.5"${d}/>` +
        `<text x="${x + 23}" y="${y + 3}" style="font:${FONT}" fill="${AXIS_COLOR}">${esc(label)}</text>`,
    );
    y += 13;
  });
}

const esc = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

function renderPanelChrome(p: Panel): string {
  const left = p.x + MARGIN.left;
  const right = p.x + PANEL_WIDTH - MARGIN.right;
  const top = p.y + MARGIN.top;
  const bottom = p.y + PANEL_HEIGHT - MARGIN.bottom;
  const parts: string[] = [];
  for (const tv of ticks(p.xScale.lo, p.xScale.hi)) {
    const px = apply(p.xScale, tv);
    parts.push(
      `<line x1="${fmt(px)}" y1="${top}" x2="${fmt(px)}" y2="${bottom}" stroke="${GRID_COLOR}" stroke-width="0.5"/>`,
      `<text x="${fmt(px)}" y="${bottom + 13}" text-anchor="middle" style="font:${FONT}" fill="${AXIS_COLOR}">${tickLabel(tv)}</text>`,
    );
  }
  for (const tv of ticks(p.yScale.lo, p.yScale.hi)) {
    const py = apply(p.yScale, tv);
    parts.push(
      `<line x1="${left}" y1="${fmt(py)}" x2="${right}" y2="${fmt(py)}" stroke="${GRID_COLOR}" stroke-width="0.5"/>`,
      `<text x="${left - 5}" y="${fmt(py + 3)}" text-anchor="end" style="font:${FONT}" fill="${AXIS_COLOR}">${tickLabel(tv)}</text>`,
    );
  }
  parts.push(
    `<rect x="${left}" y="${top}" width="${right - left}" height="${bottom - top}" fill="none" stroke="${AXIS_COLOR}" stroke-width="1"/>`,
    `<text x="${(left + right) / 2}" y="${p.y + 16}" text-anchor="middle" style="font:${FONT_TITLE}" fill="${AXIS_COLOR}">${esc(p.title)}</text>`,
    `<text x="${(left + right) / 2}" y="${bottom + 28}" text-anchor="middle" style="font:${FONT}" fill="${AXIS_COLOR}">${esc(p.xLabel)}</text>`,
    `<text transform="translate(${p.x + 14},${(top + bottom) / 2}) rotate(-90)" text-anchor="middle" style="font:${FONT}" fill="${AXIS_COLOR}">${esc(p.yLabel)}</text>`,
  );
  return parts.join("\n");
}

export function assemble(panels: Panel[], cols: number, rows: number): string {
  const width = cols * PANEL_WIDTH;
  const height = rows * PANEL_HEIGHT;
  const chunks = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
  ];
  for (const p of panels) {
    chunks.push(renderPanelChrome(p));
    // clip series to the panel frame
    const id = `clip-${p.x}-${p.y}`;
    const left = p.x + MARGIN.left;
    const top = p.y + MARGIN.top;
    chunks.push(
      `<clipPath id="${id}"><rect x="${left}" y="${top}" ` +
        `width="${PANEL_WIDTH - MARGIN.left - MARGIN.right}" ` +
        `height="${PANEL_HEIGHT - MARGIN.top - MARGIN.bottom}"/></clipPath>`,
      `<g clip-path="url(#${id})">`,
      ...p.body,
      `</g>`,
    );
  }
  chunks.push("</svg>");
  return chunks.join("\n") + "\n";
}
