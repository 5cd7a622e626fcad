import { existsSync, mkdtempSync, readdirSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { main } from "../src/cli.js";
import { readTable } from "../src/csv.js";
import { sweepPanels } from "../src/sweep.js";

const SAMPLE = fileURLToPath(new URL("../sample", import.meta.url));

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

describe("plots CLI", () => {
  it("renders field snapshots", () => {
    const out = tmp();
    expect(main(["--in", SAMPLE, "--out", out, "--which", "fields"])).toBe(0);
    expect(readdirSync(out).sort()).toEqual([
      "fields_000000.png",
      "fields_000015.png",
      "fields_000030.png",
    ]);
  });

  it("renders the time series", () => {
    const out = tmp();
    expect(main(["--in", SAMPLE, "--out", out, "--which", "timeseries"]))
      .toBe(0);
    expect(existsSync(join(out, "timeseries.png"))).toBe(true);
  });

  it("renders the sweep report", () => {
    const out = tmp();
    expect(main(["--in", SAMPLE, "--out", out, "--which", "sweep"])).toBe(0);
    expect(existsSync(join(out, "sweep.png"))).toBe(true);
  });

  it("rejects an unknown render target", () => {
    expect(main(["--in", SAMPLE, "--out", tmp(), "--which", "movies"]))
      .toBe(1);
  });

  it("rejects missing arguments", () => {
    expect(main(["--in", SAMPLE])).toBe(1);
  });

  it("rejects a missing input directory", () => {
    expect(main(["--in", join(tmpdir(), "plots-absent"), "--out", tmp(),
                 "--which", "fields"])).toBe(1);
  });

  it("fails cleanly when the requested input file is absent", () => {
    const src = tmp();
    writeFileSync(join(src, "unrelated.txt"), "x");
    expect(main(["--in", src, "--out", tmp(), "--which", "sweep"])).toBe(1);
  });
});

describe("sweepPanels", () => {
  it("plots consecutive-level differences on log axes", () => {
    const table = readTable(join(SAMPLE, "sweep_report.csv"));
    const [panel] = sweepPanels(table);
    expect(panel.series).toHaveLength(2);
    expect(panel.series[0].x).toEqual([2, 3]);
    // differences shrink as the truncation level grows
    const y = panel.series[0].y;
    expect(y[1]).toBeLessThan(y[0]);
  });
});
