import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { PanelSpec, renderPanels } from "./chart.js";
import { SERIES } from "./color.js";
import { numericColumn, readTable, Table } from "./csv.js";

/**
 * Panel layout for a monitor time series: minima, norms, charge residual,
 * and the energy functional against its integral-inequality bound. The
 * bound panel is omitted when the column is absent or entirely empty.
 */
export function timeseriesPanels(
  table: Table,
  earlyStopTime?: number,
): PanelSpec[] {
  const t = numericColumn(table, "t");
  // legend labels stay within the renderer's lowercase glyph set
  const series = (name: string, k: number) => ({
    label: name.toLowerCase().replace(/_/g, " "),
    color: SERIES[k],
    x: t,
    y: numericColumn(table, name),
  });
  const panels: PanelSpec[] = [
    { title: "minima", series: [series("min_p", 0), series("min_n", 1)] },
    {
      title: "norms",
      series: [
        series("L2_p", 0),
        series("L2_n", 1),
        series("H1_p", 2),
        series("H1_n", 3),
      ],
      vline: earlyStopTime === undefined
        ? undefined
        : { x: earlyStopTime, color: SERIES[3] },
    },
    { title: "charge residual", series: [series("charge_residual", 0)] },
  ];
  const hasBound = table.header.includes("bihari_bound")
    && numericColumn(table, "bihari_bound").some(Number.isFinite);
  if (hasBound) {
    panels.push({
      title: "y vs bound",
      series: [series("Y", 0), series("bihari_bound", 3)],
    });
  }
  return panels;
}

/**
 * Render `timeseries.csv` from `inDir` to `timeseries.png` in `outDir`.
 * When a sibling meta.json records an early stop, the stop time is marked
 * in the norm panel.
 */
export function renderTimeseries(inDir: string, outDir: string): string {
  const table = readTable(join(inDir, "timeseries.csv"));
  let earlyStopTime: number | undefined;
  const metaPath = join(inDir, "meta.json");
  if (existsSync(metaPath)) {
    try {
      const meta = JSON.parse(readFileSync(metaPath, "utf-8"));
      if (meta.early_stop != null) {
        const t = numericColumn(table, "t");
        earlyStopTime = t[t.length - 1];
      }
    } catch {
      // meta.json is optional context; a malformed one never blocks rendering
    }
  }
  const raster = renderPanels(timeseriesPanels(table, earlyStopTime));
  writeFileSync(join(outDir, "timeseries.png"), raster.toPng());
  return "timeseries.png";
}
