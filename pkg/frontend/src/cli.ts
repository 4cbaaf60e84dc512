import { writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { FIGURE_KINDS, FigureKind, buildFigure } from "./figures.js";

const USAGE = "usage: plots --in DIR --figure {rates|dropped|inp-pdf|inp-cdf} --out PATH";

/** Entry point; returns the process exit status instead of calling exit. */
export function main(argv: string[] = process.argv.slice(2)): number {
  let values: { in?: string; figure?: string; out?: string };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        in: { type: "string" },
        figure: { type: "string" },
        out: { type: "string" },
      },
    }));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    console.error(USAGE);
    return 1;
  }
  if (!values.in || !values.figure || !values.out) {
    console.error(USAGE);
    return 1;
  }
  if (!(FIGURE_KINDS as readonly string[]).includes(values.figure)) {
    console.error(`error: unknown figure ${values.figure} (expected one of ${FIGURE_KINDS.join(", ")})`);
    return 1;
  }
  try {
    writeFileSync(values.out, buildFigure(values.in, values.figure as FigureKind));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && /\bcli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main());
}
