export { axisRange, drawPanel, renderPanels } from "./chart.js";
export type { AxisRange, PanelSpec, Series } from "./chart.js";
export { BLACK, colormap, GRAY, SERIES, WHITE } from "./color.js";
export type { Rgb } from "./color.js";
export { columnIndex, numericColumn, parseCsv, readTable } from "./csv.js";
export type { Table } from "./csv.js";
export {
  fieldLayout,
  loadFieldGrid,
  panelOrigin,
  renderFields,
  renderFieldSnapshot,
  worldToPixel,
} from "./fields.js";
export type { FieldGrid, FieldLayout } from "./fields.js";
export { drawText, formatTick } from "./font.js";
export { fromPng, Raster } from "./raster.js";
export { renderSweep, sweepPanels } from "./sweep.js";
export { renderTimeseries, timeseriesPanels } from "./timeseries.js";
export { main } from "./cli.js";
