import { BLACK, GRAY, Rgb } from "./color.js";
import { drawText, formatTick, GLYPH_H, GLYPH_W } from "./font.js";
import { Raster } from "./raster.js";

export interface Series {
  label: string;
  color: Rgb;
  x: number[];
  y: number[];
  markers?: boolean;
}

export interface PanelSpec {
  title: string;
  series: Series[];
  /** Optional vertical marker (e.g. an early-stop time). */
  vline?: { x: number; color: Rgb };
}

export interface AxisRange {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

/** Data-driven axis range with 5% padding; degenerate spans get unit pads. */
export function axisRange(spec: PanelSpec): AxisRange {
  let x0 = Infinity;
  let x1 = -Infinity;
  let y0 = Infinity;
  let y1 = -Infinity;
  for (const s of spec.series) {
    for (let k = 0; k < s.x.length; k++) {
      if (!Number.isFinite(s.x[k]) || !Number.isFinite(s.y[k])) continue;
      x0 = Math.min(x0, s.x[k]);
      x1 = Math.max(x1, s.x[k]);
      y0 = Math.min(y0, s.y[k]);
      y1 = Math.max(y1, s.y[k]);
    }
  }
  if (!Number.isFinite(x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 === x0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 === y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const padY = 0.05 * (y1 - y0);
  return { x0, x1, y0: y0 - padY, y1: y1 + padY };
}

export const PANEL_W = 360;
export const PANEL_H = 150;
export const PANEL_PAD = 14;
const INNER_LEFT = 8;
const INNER_TOP = GLYPH_H + 6;
const INNER_BOTTOM = GLYPH_H + 6;

/** Draw one framed line panel with its top-left corner at (ox, oy). */
export function drawPanel(
  raster: Raster,
  ox: number,
  oy: number,
  spec: PanelSpec,
): void {
  const range = axisRange(spec);
  const x0 = ox + INNER_LEFT;
  const y0 = oy + INNER_TOP;
  const w = PANEL_W - 2 * INNER_LEFT;
  const h = PANEL_H - INNER_TOP - INNER_BOTTOM;
  const toPx = (x: number): number =>
    x0 + Math.round(((x - range.x0) / (range.x1 - range.x0)) * (w - 1));
  const toPy = (y: number): number =>
    y0 + Math.round(((range.y1 - y) / (range.y1 - range.y0)) * (h - 1));

  drawText(raster, ox + INNER_LEFT, oy + 2, spec.title, BLACK);
  raster.frame(x0, y0, w, h, GRAY);
  if (spec.vline && Number.isFinite(spec.vline.x)) {
    const px = toPx(spec.vline.x);
    raster.line(px, y0, px, y0 + h - 1, spec.vline.color);
  }
  for (const s of spec.series) {
    let prev: [number, number] | null = null;
    for (let k = 0; k < s.x.length; k++) {
      if (!Number.isFinite(s.x[k]) || !Number.isFinite(s.y[k])) {
        prev = null;
        continue;
      }
      const pt: [number, number] = [toPx(s.x[k]), toPy(s.y[k])];
      if (prev) raster.line(prev[0], prev[1], pt[0], pt[1], s.color);
      if (s.markers) raster.marker(pt[0], pt[1], 2, s.color);
      prev = pt;
    }
  }
  // axis extremes along the bottom and left edges, plus a color-keyed legend
  const yBottom = oy + PANEL_H - GLYPH_H - 2;
  drawText(raster, x0, yBottom, formatTick(range.x0), GRAY);
  const xmaxLabel = formatTick(range.x1);
  drawText(raster, x0 + w - xmaxLabel.length * GLYPH_W, yBottom,
           xmaxLabel, GRAY);
  drawText(raster, x0 + 2, y0 + 2, formatTick(range.y1), GRAY);
  drawText(raster, x0 + 2, y0 + h - GLYPH_H - 2, formatTick(range.y0), GRAY);
  let lx = ox + INNER_LEFT + (spec.title.length + 2) * GLYPH_W;
  for (const s of spec.series) {
    drawText(raster, lx, oy + 2, s.label, s.color);
    lx += (s.label.length + 1) * GLYPH_W;
  }
}

/** Stack panels vertically into one image. */
export function renderPanels(specs: PanelSpec[]): Raster {
  const width = PANEL_W + 2 * PANEL_PAD;
  const height = specs.length * (PANEL_H + PANEL_PAD) + PANEL_PAD;
  const raster = new Raster(width, height);
  specs.forEach((spec, k) => {
    drawPanel(raster, PANEL_PAD, PANEL_PAD + k * (PANEL_H + PANEL_PAD), spec);
  });
  return raster;
}
