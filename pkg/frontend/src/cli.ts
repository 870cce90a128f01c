#!/usr/bin/env node
/** figures --in DIR --out DIR: regenerate coverage/width panels from an
 * experiment output directory. */

import { SchemaError } from "./csv.js";
import { generateFigures } from "./figures.js";

function parseArgs(argv: string[]): { inDir: string; outDir: string } {
  let inDir: string | undefined;
  let outDir: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--in") {
      inDir = argv[++i];
    } else if (arg === "--out") {
      outDir = argv[++i];
    } else if (arg === "--help" || arg === "-h") {
      console.log("usage: figures --in DIR --out DIR");
      process.exit(0);
    } else {
      throw new Error(`unknown argument ${arg}`);
    }
  }
  if (!inDir || !outDir) {
    throw new Error("both --in and --out are required (see --help)");
  }
  return { inDir, outDir };
}

export function main(argv: string[]): number {
  let opts;
  try {
    opts = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const result = generateFigures(opts.inDir, opts.outDir);
    for (const warning of result.warnings) {
      console.warn(`warning: ${warning}`);
    }
    for (const path of result.written) {
      console.log(`wrote ${path}`);
    }
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(err.message);
      return 1;
    }
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("cli.ts")) {
  process.exit(main(process.argv.slice(2)));
}
