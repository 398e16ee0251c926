#!/usr/bin/env node
/**
 * Command line: `snnforge-trainer train-export --out DIR [options]`.
 */

import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { trainExport } from "./export.js";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        out: { type: "string" },
        name: { type: "string" },
        seed: { type: "string" },
        epochs: { type: "string" },
        hidden: { type: "string" },
        steps: { type: "string" },
        "neuron-bits": { type: "string" },
        "ff-bits": { type: "string" },
        parity: { type: "string" },
      },
    });
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 2;
  }
  const [command] = parsed.positionals;
  if (command !== "train-export") {
    console.error("usage: snnforge-trainer train-export --out DIR [--seed N]");
    console.error("       [--epochs N] [--hidden N] [--steps N]");
    console.error("       [--neuron-bits N] [--ff-bits N] [--parity N] [--name S]");
    return 2;
  }
  if (!parsed.values.out) {
    console.error("error: --out is required");
    return 2;
  }
  const num = (key: string): number | undefined => {
    const raw = (parsed.values as Record<string, string | undefined>)[key];
    if (raw === undefined) return undefined;
    const n = Number(raw);
    if (!Number.isFinite(n)) {
      throw new Error(`--${key} must be a number, got ${raw}`);
    }
    return n;
  };

  try {
    const summary = trainExport({
      outDir: parsed.values.out,
      name: parsed.values.name,
      seed: num("seed"),
      epochs: num("epochs"),
      nHidden: num("hidden"),
      nSteps: num("steps"),
      neuronBits: num("neuron-bits"),
      ffBits: num("ff-bits"),
      parityCount: num("parity"),
    });
    const last = summary.epochStats[summary.epochStats.length - 1];
    console.log(
      `trained ${summary.name}: train acc ${last.trainAccuracy.toFixed(3)}, ` +
        `float test acc ${summary.floatAccuracy.toFixed(3)}, ` +
        `fixed test acc ${summary.fixedAccuracy.toFixed(3)} ` +
        `(scale 2^${summary.scaleExp})`,
    );
    console.log(`wrote ${summary.files.length} files to ${parsed.values.out}`);
    return 0;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 2;
  }
}

if (
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href
) {
  process.exit(main(process.argv.slice(2)));
}
