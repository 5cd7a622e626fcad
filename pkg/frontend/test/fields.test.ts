import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import {
  fieldLayout,
  loadFieldGrid,
  renderFields,
  worldToPixel,
} from "../src/fields.js";
import { fromPng } from "../src/raster.js";

const SAMPLE = fileURLToPath(new URL("../sample", import.meta.url));

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

describe("renderFields on the bundled sample", () => {
  it("writes one deterministically named PNG per snapshot", () => {
    const out = tmp();
    const written = renderFields(SAMPLE, out);
    expect(written).toEqual([
      "fields_000000.png",
      "fields_000015.png",
      "fields_000030.png",
    ]);
    for (const name of written) {
      expect(readFileSync(join(out, name)).length).toBeGreaterThan(0);
    }
  });

  it("re-renders byte-identically", () => {
    const a = tmp();
    const b = tmp();
    renderFields(SAMPLE, a);
    renderFields(SAMPLE, b);
    for (const name of ["fields_000000.png", "fields_000030.png"]) {
      expect(readFileSync(join(a, name)).equals(readFileSync(join(b, name))))
        .toBe(true);
    }
  });

  it("draws the gap outline where g0 + c|x|^(4/3) predicts it", () => {
    // the sample run uses the cusped profile with g0 = 0.3, c = 0.8
    const out = tmp();
    renderFields(SAMPLE, out);
    const grid = loadFieldGrid(join(SAMPLE, "fields_000000.csv"));
    const layout = fieldLayout(grid);
    const img = fromPng(readFileSync(join(out, "fields_000000.png")));
    for (let i = 0; i < grid.ni; i++) {
      const x = grid.x[i];
      const w = 0.3 + 0.8 * Math.abs(x) ** (4 / 3);
      for (const panel of [0, 1, 2]) {
        const [px, py] = worldToPixel(layout, panel, x, w);
        let found = false;
        for (let dy = -1; dy <= 1 && !found; dy++) {
          const [r, g, b] = img.get(px, py + dy);
          found = r === 0 && g === 0 && b === 0;
        }
        expect(found, `no outline pixel near x=${x} in panel ${panel}`)
          .toBe(true);
      }
    }
  });
});

describe("renderFields on synthetic grids", () => {
  function writeConstantSnapshot(dir: string): void {
    // 5x5 rectangle grid, constant p, varying n and phi
    const lines = ["i,j,x,y,p,n,phi"];
    for (let j = 0; j < 5; j++) {
      for (let i = 0; i < 5; i++) {
        const x = -0.5 + 0.25 * i;
        const y = 0.25 * j;
        lines.push(`${i},${j},${x},${y},2,${1 + x * y},${y}`);
      }
    }
    writeFileSync(join(dir, "fields_000000.csv"), lines.join("\n") + "\n");
  }

  it("paints a constant field as one flat color", () => {
    const src = tmp();
    const out = tmp();
    writeConstantSnapshot(src);
    renderFields(src, out);
    const grid = loadFieldGrid(join(src, "fields_000000.csv"));
    const layout = fieldLayout(grid);
    const img = fromPng(readFileSync(join(out, "fields_000000.png")));
    const probes: Array<[number, number]> = [
      [-0.3, 0.2],
      [0.0, 0.5],
      [0.35, 0.8],
    ];
    const [px0, py0] = worldToPixel(layout, 0, probes[0][0], probes[0][1]);
    const ref = img.get(px0, py0);
    for (const [x, y] of probes) {
      const [px, py] = worldToPixel(layout, 0, x, y);
      expect(img.get(px, py)).toEqual(ref);
    }
  });

  it("rejects a snapshot with the wrong header", () => {
    const src = tmp();
    writeFileSync(join(src, "fields_000000.csv"), "a,b,c\n1,2,3\n");
    expect(() => renderFields(src, tmp())).toThrow(/unexpected fields header/);
  });

  it("fails descriptively when no snapshots exist", () => {
    expect(() => renderFields(tmp(), tmp())).toThrow(/no fields_/);
  });
});
