import { readdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { BLACK, colormap } from "./color.js";
import { columnIndex, readTable } from "./csv.js";
import { drawText, GLYPH_H } from "./font.js";
import { Raster } from "./raster.js";

const FIELDS_HEADER = ["i", "j", "x", "y", "p", "n", "phi"];

/**
 * A structured node grid loaded from a fields snapshot. Nodes are indexed
 * (i, j) with i along x and j along the wall-following coordinate; values
 * are stored flat as idx = j * ni + i.
 */
export interface FieldGrid {
  ni: number;
  nj: number;
  x: Float64Array; // node x, length ni (columns share x)
  y: Float64Array; // node y, length ni * nj
  p: Float64Array;
  n: Float64Array;
  phi: Float64Array;
  /** Gap height per column: y of the top node row. */
  top: Float64Array;
}

export function loadFieldGrid(path: string): FieldGrid {
  const table = readTable(path);
  if (table.header.join(",") !== FIELDS_HEADER.join(",")) {
    throw new Error(
      `${path}: unexpected fields header "${table.header.join(",")}"`,
    );
  }
  const col = Object.fromEntries(
    FIELDS_HEADER.map((name) => [name, columnIndex(table, name)]),
  );
  let ni = 0;
  let nj = 0;
  for (const r of table.rows) {
    ni = Math.max(ni, Number(r[col.i]) + 1);
    nj = Math.max(nj, Number(r[col.j]) + 1);
  }
  if (table.rows.length !== ni * nj) {
    throw new Error(
      `${path}: ${table.rows.length} rows do not fill a ${ni}x${nj} grid`,
    );
  }
  const g: FieldGrid = {
    ni,
    nj,
    x: new Float64Array(ni),
    y: new Float64Array(ni * nj),
    p: new Float64Array(ni * nj),
    n: new Float64Array(ni * nj),
    phi: new Float64Array(ni * nj),
    top: new Float64Array(ni),
  };
  for (const r of table.rows) {
    const i = Number(r[col.i]);
    const j = Number(r[col.j]);
    const idx = j * ni + i;
    g.x[i] = Number(r[col.x]);
    g.y[idx] = Number(r[col.y]);
    g.p[idx] = Number(r[col.p]);
    g.n[idx] = Number(r[col.n]);
    g.phi[idx] = Number(r[col.phi]);
    if (j === nj - 1) g.top[i] = Number(r[col.y]);
  }
  return g;
}

/** Pixel geometry of the three-panel snapshot image. */
export interface FieldLayout {
  width: number;
  height: number;
  panelW: number;
  panelH: number;
  gap: number;
  left: number;
  topPad: number;
  xmin: number;
  xmax: number;
  ymin: number;
  ymax: number;
}

export function fieldLayout(grid: FieldGrid): FieldLayout {
  const xmin = grid.x[0];
  const xmax = grid.x[grid.ni - 1];
  const ymin = 0;
  let ymax = 0;
  for (const t of grid.top) ymax = Math.max(ymax, t);
  const panelW = 240;
  const aspect = (ymax - ymin) / (xmax - xmin);
  const panelH = Math.min(480, Math.max(80, Math.round(panelW * aspect)));
  return {
    width: 12 + 3 * panelW + 2 * 12 + 12,
    height: 16 + panelH + 28,
    panelW,
    panelH,
    gap: 12,
    left: 12,
    topPad: 16,
    xmin,
    xmax,
    ymin,
    ymax,
  };
}

/** Top-left pixel of panel k (0: p, 1: n, 2: phi). */
export function panelOrigin(layout: FieldLayout, k: number): [number, number] {
  return [layout.left + k * (layout.panelW + layout.gap), layout.topPad];
}

/** World (x, y) to pixel within panel k; y grows downward on screen. */
export function worldToPixel(
  layout: FieldLayout,
  k: number,
  x: number,
  y: number,
): [number, number] {
  const [px0, py0] = panelOrigin(layout, k);
  const fx = (x - layout.xmin) / (layout.xmax - layout.xmin);
  const fy = (layout.ymax - y) / (layout.ymax - layout.ymin);
  return [
    px0 + Math.round(fx * (layout.panelW - 1)),
    py0 + Math.round(fy * (layout.panelH - 1)),
  ];
}

/**
 * Bilinear sample of one field at world (x, y); returns NaN outside the
 * mapped domain (above the gap profile or outside [xmin, xmax]).
 */
function sampleField(grid: FieldGrid, values: Float64Array,
                     x: number, y: number): number {
  const ni = grid.ni;
  const xmin = grid.x[0];
  const xmax = grid.x[ni - 1];
  if (x < xmin || x > xmax || y < 0) return NaN;
  const fi = ((x - xmin) / (xmax - xmin)) * (ni - 1);
  const i0 = Math.min(ni - 2, Math.floor(fi));
  const ax = fi - i0;
  const wall = (1 - ax) * grid.top[i0] + ax * grid.top[i0 + 1];
  if (wall <= 0) return NaN;
  const eta = y / wall;
  if (eta > 1 + 1e-12) return NaN;
  const fj = Math.min(1, eta) * (grid.nj - 1);
  const j0 = Math.min(grid.nj - 2, Math.floor(fj));
  const ay = fj - j0;
  const v00 = values[j0 * ni + i0];
  const v10 = values[j0 * ni + i0 + 1];
  const v01 = values[(j0 + 1) * ni + i0];
  const v11 = values[(j0 + 1) * ni + i0 + 1];
  return (1 - ay) * ((1 - ax) * v00 + ax * v10)
    + ay * ((1 - ax) * v01 + ax * v11);
}

function drawPanel(
  raster: Raster,
  layout: FieldLayout,
  k: number,
  title: string,
  grid: FieldGrid,
  values: Float64Array,
): void {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const span = hi - lo;
  const [px0, py0] = panelOrigin(layout, k);
  for (let py = 0; py < layout.panelH; py++) {
    const y = layout.ymax
      - (py / (layout.panelH - 1)) * (layout.ymax - layout.ymin);
    for (let px = 0; px < layout.panelW; px++) {
      const x = layout.xmin
        + (px / (layout.panelW - 1)) * (layout.xmax - layout.xmin);
      const v = sampleField(grid, values, x, y);
      if (Number.isNaN(v)) continue;
      const t = span > 0 ? (v - lo) / span : 0.5;
      raster.set(px0 + px, py0 + py, colormap(t));
    }
  }
  // domain outline: bottom electrode, side walls, and the gap profile
  const [bx0, by0] = worldToPixel(layout, k, layout.xmin, 0);
  const [bx1] = worldToPixel(layout, k, layout.xmax, 0);
  raster.line(bx0, by0, bx1, by0, BLACK);
  for (let i = 0; i + 1 < grid.ni; i++) {
    const [ax, ay] = worldToPixel(layout, k, grid.x[i], grid.top[i]);
    const [bx, by] = worldToPixel(layout, k, grid.x[i + 1], grid.top[i + 1]);
    raster.line(ax, ay, bx, by, BLACK);
  }
  const [lx, ly] = worldToPixel(layout, k, layout.xmin, grid.top[0]);
  raster.line(lx, ly, bx0, by0, BLACK);
  const [rx, ry] = worldToPixel(layout, k, layout.xmax, grid.top[grid.ni - 1]);
  raster.line(rx, ry, bx1, by0, BLACK);
  drawText(raster, px0, py0 - GLYPH_H - 2, title, BLACK);
}

/** Render one snapshot as a p / n / phi triptych. */
export function renderFieldSnapshot(grid: FieldGrid): Raster {
  const layout = fieldLayout(grid);
  const raster = new Raster(layout.width, layout.height);
  drawPanel(raster, layout, 0, "p", grid, grid.p);
  drawPanel(raster, layout, 1, "n", grid, grid.n);
  drawPanel(raster, layout, 2, "phi", grid, grid.phi);
  return raster;
}

const SNAPSHOT_RE = /^fields_(\d{6})\.csv$/;

/**
 * Render every fields_XXXXXX.csv in `inDir` to fields_XXXXXX.png in `outDir`.
 * Returns the written file names in ascending step order.
 */
export function renderFields(inDir: string, outDir: string): string[] {
  const snaps = readdirSync(inDir)
    .filter((f) => SNAPSHOT_RE.test(f))
    .sort();
  if (snaps.length === 0) {
    throw new Error(`no fields_*.csv snapshots found in ${inDir}`);
  }
  const written: string[] = [];
  for (const name of snaps) {
    const grid = loadFieldGrid(join(inDir, name));
    const out = name.replace(/\.csv$/, ".png");
    writeFileSync(join(outDir, out), renderFieldSnapshot(grid).toPng());
    written.push(out);
  }
  return written;
}
