/**
 * Train on the glyph task, quantize, and write everything the toolchain
 * needs to reproduce the model: config JSON, binary weight files, a parity
 * set of rasters with the spike counts this package computed for them, and
 * a metrics file. A second run with the same options is byte-identical.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { classify, runCounts } from "./fixedpoint.js";
import { writeConfig, weightFileName } from "./config.js";
import { makeDataset, N_CLASSES } from "./glyphs.js";
import {
  DEFAULT_MODEL,
  EpochStats,
  accuracy,
  initModel,
  train,
} from "./model.js";
import { quantizeModel } from "./quantize.js";
import { writeRasterText } from "./raster.js";
import { Rng } from "./rng.js";
import { writeWeights } from "./weightfile.js";

export interface ExportOptions {
  outDir: string;
  name?: string;
  seed?: number;
  epochs?: number;
  lr?: number;
  nHidden?: number;
  nSteps?: number;
  trainPerClass?: number;
  testPerClass?: number;
  neuronBits?: number;
  ffBits?: number;
  parityCount?: number;
}

export interface ExportSummary {
  name: string;
  floatAccuracy: number;
  fixedAccuracy: number;
  scaleExp: number;
  epochStats: EpochStats[];
  files: string[];
}

export const EXPORT_DEFAULTS = {
  name: "glyphnet",
  seed: 20240815,
  epochs: 25,
  lr: 5e-3,
  nHidden: 48,
  nSteps: 16,
  trainPerClass: 40,
  testPerClass: 10,
  neuronBits: 12,
  ffBits: 6,
  parityCount: 20,
};

export function trainExport(options: ExportOptions): ExportSummary {
  // explicit undefined (e.g. an unset CLI flag) must not override a default
  const given = Object.fromEntries(
    Object.entries(options).filter(([, v]) => v !== undefined),
  );
  const opts = { ...EXPORT_DEFAULTS, ...given } as Required<ExportOptions>;
  const data = makeDataset({
    seed: opts.seed,
    trainPerClass: opts.trainPerClass,
    testPerClass: opts.testPerClass,
    nSteps: opts.nSteps,
  });

  const cfg = { ...DEFAULT_MODEL, nHidden: opts.nHidden };
  const model = initModel(cfg, new Rng(opts.seed ^ 0x9e3779b9));
  const epochStats = train(model, data.train, {
    epochs: opts.epochs,
    lr: opts.lr,
    seed: opts.seed + 1,
  });
  const floatAccuracy = accuracy(model, data.test);

  const net = quantizeModel(model, {
    name: opts.name,
    nCycles: opts.nSteps,
    neuronBits: opts.neuronBits,
    ffBits: opts.ffBits,
  });

  let hits = 0;
  for (const s of data.test) {
    if (classify(runCounts(net, s.raster)) === s.label) hits += 1;
  }
  const fixedAccuracy = hits / data.test.length;

  const outDir = opts.outDir;
  const parityDir = path.join(outDir, "parity");
  fs.mkdirSync(parityDir, { recursive: true });
  const files: string[] = [];
  const put = (rel: string, content: string | Buffer): void => {
    fs.writeFileSync(path.join(outDir, rel), content);
    files.push(rel);
  };

  put(`${net.name}.json`, writeConfig(net));
  net.layers.forEach((l, k) => {
    put(
      weightFileName(net.name, k + 1),
      writeWeights(l.wFF, l.nNeurons, l.nInputs, net.ffBits, net.scaleExp),
    );
  });

  const paritySamples = data.test.slice(0, opts.parityCount);
  const labelRows: string[] = [];
  const expected = paritySamples.map((s, i) => {
    const file = `sample_${String(i).padStart(3, "0")}.rst`;
    put(path.join("parity", file), writeRasterText(s.raster));
    labelRows.push(`${file},${s.label}`);
    const counts = runCounts(net, s.raster);
    return { file, label: s.label, counts, predicted: classify(counts) };
  });
  put(path.join("parity", "labels.csv"), labelRows.join("\n") + "\n");
  put("expected.json", JSON.stringify({ samples: expected }, null, 2) + "\n");
  put(
    "metrics.json",
    JSON.stringify(
      {
        classes: N_CLASSES,
        train_samples: data.train.length,
        test_samples: data.test.length,
        epochs: opts.epochs,
        final_train_accuracy: epochStats[epochStats.length - 1].trainAccuracy,
        float_accuracy: floatAccuracy,
        fixed_accuracy: fixedAccuracy,
        scale_exp: net.scaleExp,
      },
      null,
      2,
    ) + "\n",
  );

  return {
    name: net.name,
    floatAccuracy,
    fixedAccuracy,
    scaleExp: net.scaleExp,
    epochStats,
    files,
  };
}
