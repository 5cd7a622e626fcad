import { describe, expect, it } from "vitest";
import { numericColumn, parseCsv } from "../src/csv.js";
import { colormap } from "../src/color.js";
import { formatTick } from "../src/font.js";
import { Raster } from "../src/raster.js";

describe("parseCsv", () => {
  it("splits header and rows", () => {
    const t = parseCsv("a,b\n1,2\n3,4\n");
    expect(t.header).toEqual(["a", "b"]);
    expect(t.rows).toEqual([["1", "2"], ["3", "4"]]);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(/row 1/);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(/empty/);
  });

  it("maps empty cells to NaN in numeric columns", () => {
    const t = parseCsv("t,v\n0,\n1,2.5\n");
    expect(numericColumn(t, "v")).toEqual([NaN, 2.5]);
  });

  it("names a missing column", () => {
    const t = parseCsv("t,v\n0,1\n");
    expect(() => numericColumn(t, "w")).toThrow(/"w"/);
  });
});

describe("colormap", () => {
  it("hits the dark and bright anchors at the extremes", () => {
    expect(colormap(0)).toEqual([68, 1, 84]);
    expect(colormap(1)).toEqual([253, 231, 37]);
  });

  it("clamps out-of-range inputs", () => {
    expect(colormap(-3)).toEqual(colormap(0));
    expect(colormap(7)).toEqual(colormap(1));
  });
});

describe("formatTick", () => {
  it("keeps labels compact", () => {
    expect(formatTick(0)).toBe("0");
    expect(formatTick(1.25)).toBe("1.25");
    expect(formatTick(1e-7)).toBe("1e-7");
  });
});

describe("Raster", () => {
  it("draws both endpoints of a line", () => {
    const r = new Raster(10, 10);
    r.line(1, 1, 8, 5, [10, 20, 30]);
    expect(r.get(1, 1)).toEqual([10, 20, 30]);
    expect(r.get(8, 5)).toEqual([10, 20, 30]);
  });

  it("ignores out-of-bounds writes", () => {
    const r = new Raster(4, 4);
    r.set(-1, 0, [1, 2, 3]);
    r.set(0, 99, [1, 2, 3]);
    expect(r.get(0, 0)).toEqual([255, 255, 255]);
  });

  it("rejects degenerate sizes", () => {
    expect(() => new Raster(0, 5)).toThrow(/invalid/);
  });
});
