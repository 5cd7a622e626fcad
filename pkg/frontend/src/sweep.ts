import { writeFileSync } from "node:fs";
import { join } from "node:path";
import { PanelSpec, renderPanels } from "./chart.js";
import { SERIES } from "./color.js";
import { numericColumn, readTable, Table } from "./csv.js";

/**
 * Panel for a truncation-level sweep report: log10 of the consecutive-level
 * solution differences against log10 of the finer truncation level.
 */
export function sweepPanels(table: Table): PanelSpec[] {
  const m = numericColumn(table, "M_high").map(Math.log10);
  const series = (name: string, k: number) => ({
    label: `log10 ${name.replace(/_/g, " ")}`,
    color: SERIES[k],
    x: m,
    y: numericColumn(table, name).map(Math.log10),
    markers: true,
  });
  return [
    {
      title: "sweep",
      series: [series("diff_p", 0), series("diff_n", 1)],
    },
  ];
}

/** Render `sweep_report.csv` from `inDir` to `sweep.png` in `outDir`. */
export function renderSweep(inDir: string, outDir: string): string {
  const table = readTable(join(inDir, "sweep_report.csv"));
  const raster = renderPanels(sweepPanels(table));
  writeFileSync(join(outDir, "sweep.png"), raster.toPng());
  return "sweep.png";
}
