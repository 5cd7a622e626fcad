#!/usr/bin/env node
import { existsSync, mkdirSync, statSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";
import { renderFields } from "./fields.js";
import { renderSweep } from "./sweep.js";
import { renderTimeseries } from "./timeseries.js";

const USAGE = "usage: plots --in DIR --out DIR --which fields|timeseries|sweep";

export function main(argv: string[]): number {
  let values: { in?: string; out?: string; which?: string };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        which: { type: "string" },
      },
      allowPositionals: false,
    }));
  } catch (e) {
    console.error(`${(e as Error).message}\n${USAGE}`);
    return 1;
  }
  const inDir = values.in;
  const outDir = values.out;
  const which = values.which;
  if (!inDir || !outDir || !which) {
    console.error(USAGE);
    return 1;
  }
  if (which !== "fields" && which !== "timeseries" && which !== "sweep") {
    console.error(`unknown --which "${which}"\n${USAGE}`);
    return 1;
  }
  if (!existsSync(inDir) || !statSync(inDir).isDirectory()) {
    console.error(`input directory not found: ${inDir}`);
    return 1;
  }
  try {
    mkdirSync(outDir, { recursive: true });
    const written =
      which === "fields"
        ? renderFields(inDir, outDir)
        : which === "timeseries"
          ? [renderTimeseries(inDir, outDir)]
          : [renderSweep(inDir, outDir)];
    for (const name of written) {
      console.log(name);
    }
    return 0;
  } catch (e) {
    console.error((e as Error).message);
    return 1;
  }
}

if (
  process.argv[1]
  && import.meta.url === pathToFileURL(process.argv[1]).href
) {
  process.exit(main(process.argv.slice(2)));
}
