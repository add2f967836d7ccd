/**
 * Centralized style constants so figure regeneration is versioned: bumping
 * STYLE_VERSION acknowledges an intentional change of rendered bytes.
 */

export const STYLE_VERSION = 1;

/** Gain oscillator (blue-detuned drive) draws blue, loss draws red. */
export const COLOR_GAIN = "#1f77b4";
export const COLOR_LOSS = "#d62728";

export const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

export const AXIS_COLOR = "#333333";
export const GRID_COLOR = "#dddddd";
export const FONT = "10px sans-serif";
export const FONT_TITLE = "11px sans-serif";

export const PANEL_WIDTH = 320;
export const PANEL_HEIGHT = 240;
export const MARGIN = { top: 28, right: 14, bottom: 38, left: 52 };

/** Wigner heatmaps are downsampled to at most this many cells per axis. */
export const HEATMAP_MAX_CELLS = 96;
