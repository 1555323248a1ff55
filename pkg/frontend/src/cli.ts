/**
 * Command line driver: turn an energy CSV into SVG figures.
 *
 *   ellg-plots energy <csv> <out.svg> [--log]
 *   ellg-plots diagnostics <csv> <out.svg>
 */

import { readFile, writeFile } from "node:fs/promises";
import { pathToFileURL } from "node:url";
import { parseEnergyCsv } from "./csv.js";
import { energyFigure, diagnosticsFigure } from "./figures.js";

const USAGE = `usage: ellg-plots energy <energy.csv> <out.svg> [--log]
       ellg-plots diagnostics <energy.csv> <out.svg>`;

export async function run(argv: string[]): Promise<number> {
  const args = argv.filter((a) => a !== "--log");
  const logScale = argv.includes("--log");
  const [command, csvPath, outPath] = args;

  if (!command || !csvPath || !outPath || args.length !== 3) {
    console.error(USAGE);
    return 2;
  }
  if (command !== "energy" && command !== "diagnostics") {
    console.error(`unknown command: ${command}`);
    console.error(USAGE);
    return 2;
  }
  if (command === "diagnostics" && logScale) {
    console.error("--log only applies to the energy figure");
    return 2;
  }

  let text: string;
  try {
    text = await readFile(csvPath, "utf8");
  } catch (err) {
    console.error(`cannot read ${csvPath}: ${(err as Error).message}`);
    return 1;
  }

  let svg: string;
  try {
    const records = parseEnergyCsv(text);
    svg =
      command === "energy"
        ? energyFigure(records, { logScale })
        : diagnosticsFigure(records);
  } catch (err) {
    console.error(`${csvPath}: ${(err as Error).message}`);
    return 1;
  }

  try {
    await writeFile(outPath, svg, "utf8");
  } catch (err) {
    console.error(`cannot write ${outPath}: ${(err as Error).message}`);
    return 1;
  }
  console.log(`wrote ${outPath}`);
  return 0;
}

if (process.argv[1] && pathToFileURL(process.argv[1]).href === import.meta.url) {
  run(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
