#!/usr/bin/env node
/**
 * CLI: `sirbass-plots render --spec plot.json [--out figure.svg]`
 *
 * Input CSV paths in the spec resolve relative to the spec file; the output
 * path resolves relative to the working directory unless absolute.
 */

import { writeFileSync } from "node:fs";
import { resolve } from "node:path";

import { renderSpec, specBaseDir } from "./render.js";
import { loadSpec } from "./spec.js";

function usage(): never {
  console.error("usage: sirbass-plots render --spec PATH [--out PATH]");
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv[0] !== "render") usage();
  let specPath: string | undefined;
  let outOverride: string | undefined;
  for (let i = 1; i < argv.length; i += 2) {
    if (argv[i] === "--spec") specPath = argv[i + 1];
    else if (argv[i] === "--out") outOverride = argv[i + 1];
    else usage();
  }
  if (!specPath) usage();

  try {
    const spec = loadSpec(specPath);
    const svg = renderSpec(spec, specBaseDir(specPath));
    const outPath = resolve(outOverride ?? spec.output);
    writeFileSync(outPath, svg);
    console.log(outPath);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
