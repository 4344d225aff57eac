#!/usr/bin/env node
/** figure-kit <figure-id> --in results.csv --out fig.svg|fig.png
 *
 * Exit codes: 0 success, 2 usage error, 1 render failure.
 */

import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { FIGURE_IDS } from "./figures.js";
import { isFigureId, renderFile } from "./index.js";

const USAGE = `usage: figure-kit <figure-id> --in results.csv --out fig.svg
  figure ids: ${FIGURE_IDS.join(", ")}
  --out extension picks the format (.svg or .png)`;

export async function main(argv: string[]): Promise<number> {
  let args;
  try {
    args = parseArgs({
      args: argv,
      options: { in: { type: "string" }, out: { type: "string" } },
      allowPositionals: true,
    });
  } catch (error) {
    console.error(`${(error as Error).message}\n${USAGE}`);
    return 2;
  }
  const figureId = args.positionals[0];
  const inPath = args.values.in;
  const outPath = args.values.out;
  if (args.positionals.length !== 1 || !inPath || !outPath) {
    console.error(USAGE);
    return 2;
  }
  if (!isFigureId(figureId)) {
    console.error(
      `unknown figure id '${figureId}'; expected one of ${FIGURE_IDS.join(", ")}`,
    );
    return 2;
  }
  try {
    const s = await renderFile(figureId, inPath, outPath);
    const shape =
      s.bars > 0
        ? `${s.panels} panel(s), ${s.bars} bars`
        : `${s.panels} panel(s), ${s.series} series, ${s.points} points`;
    console.log(`wrote ${outPath} (${shape})`);
    return 0;
  } catch (error) {
    console.error(`error: ${(error as Error).message}`);
    return 1;
  }
}

if (
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href
) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
