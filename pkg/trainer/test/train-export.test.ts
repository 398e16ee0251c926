import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { main } from "../src/cli.js";
import { ExportSummary, trainExport } from "../src/export.js";
import { FixedNet, classify, runCounts } from "../src/fixedpoint.js";
import { readRasterText } from "../src/raster.js";
import { readWeights } from "../src/weightfile.js";

let root: string;
let outDir: string;
let summary: ExportSummary;

beforeAll(() => {
  root = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-"));
  outDir = path.join(root, "export");
  summary = trainExport({ outDir });
});

afterAll(() => {
  fs.rmSync(root, { recursive: true, force: true });
});

describe("training", () => {
  it("separates the glyph classes comfortably", () => {
    expect(summary.floatAccuracy).toBeGreaterThanOrEqual(0.9);
  });

  it("loses at most 3 points to quantization", () => {
    expect(
      Math.abs(summary.floatAccuracy - summary.fixedAccuracy),
    ).toBeLessThanOrEqual(0.03);
  });
});

describe("export bundle", () => {
  it("writes config, weights, parity rasters, and reports", () => {
    const names = summary.files.map((f) => f.split(path.sep)[0]);
    expect(names).toContain("glyphnet.json");
    expect(names).toContain("glyphnet_l1_ff.wgt");
    expect(names).toContain("glyphnet_l2_ff.wgt");
    expect(names).toContain("expected.json");
    expect(names).toContain("metrics.json");
    const parity = fs.readdirSync(path.join(outDir, "parity"));
    expect(parity.filter((f) => f.endsWith(".rst"))).toHaveLength(20);
    expect(parity).toContain("labels.csv");
  });

  it("re-exports byte-identically", () => {
    const second = path.join(root, "export2");
    const again = trainExport({ outDir: second });
    expect(again.files).toEqual(summary.files);
    for (const rel of summary.files) {
      const a = fs.readFileSync(path.join(outDir, rel));
      const b = fs.readFileSync(path.join(second, rel));
      expect(a.equals(b), `${rel} differs between exports`).toBe(true);
    }
  });

  it("reproduces the expected counts from the files alone", () => {
    // rebuild the net strictly from what landed on disk
    const cfg = JSON.parse(
      fs.readFileSync(path.join(outDir, "glyphnet.json"), "utf8"),
    );
    const net: FixedNet = {
      name: cfg.name,
      nCycles: cfg.n_cycles,
      neuronBits: cfg.neuron_bits,
      ffBits: cfg.ff_weight_bits,
      scaleExp: cfg.scale_exp,
      layers: cfg.layers.map(
        (l: Record<string, unknown>) => ({
          nInputs: l.n_inputs,
          nNeurons: l.n_neurons,
          model: l.model,
          reset: l.reset,
          vTh: l.v_th,
          vReset: l.v_reset,
          betaShift: l.beta_shift,
          wFF: readWeights(
            fs.readFileSync(path.join(outDir, l.weights_ff as string)),
          ).values,
        }),
      ),
    };
    const expected = JSON.parse(
      fs.readFileSync(path.join(outDir, "expected.json"), "utf8"),
    );
    for (const sample of expected.samples) {
      const raster = readRasterText(
        fs.readFileSync(path.join(outDir, "parity", sample.file), "utf8"),
      );
      const counts = runCounts(net, raster);
      expect(counts).toEqual(sample.counts);
      expect(classify(counts)).toBe(sample.predicted);
    }
  });
});

describe("parity with the toolchain", () => {
  it("the simulator reproduces every exported spike count", () => {
    const report = path.join(root, "parity_report.json");
    const res = spawnSync(
      "python3",
      [
        "-m",
        "snnforge.cli",
        "sim",
        "glyphnet.json",
        "--dataset",
        "parity",
        "--jobs",
        "1",
        "--report",
        report,
      ],
      { cwd: outDir, encoding: "utf8" },
    );
    expect(res.error, String(res.error)).toBeUndefined();
    expect(res.status, res.stderr).toBe(0);

    const simmed = JSON.parse(fs.readFileSync(report, "utf8"));
    const expected = JSON.parse(
      fs.readFileSync(path.join(outDir, "expected.json"), "utf8"),
    );
    expect(simmed.samples).toHaveLength(expected.samples.length);
    for (let i = 0; i < expected.samples.length; i++) {
      const sim = simmed.samples[i];
      const exp = expected.samples[i];
      expect(sim.name).toBe(exp.file);
      expect(sim.out_counts).toEqual(exp.counts);
      expect(sim.predicted_class).toBe(exp.predicted);
      expect(sim.label).toBe(exp.label);
    }
  });
});

describe("cli", () => {
  it("runs train-export end to end", () => {
    const dir = path.join(root, "cli_out");
    const rc = main([
      "train-export",
      "--out",
      dir,
      "--epochs",
      "1",
      "--hidden",
      "8",
      "--parity",
      "2",
    ]);
    expect(rc).toBe(0);
    expect(fs.existsSync(path.join(dir, "glyphnet.json"))).toBe(true);
    expect(
      fs.readdirSync(path.join(dir, "parity")).filter((f) =>
        f.endsWith(".rst"),
      ),
    ).toHaveLength(2);
  });

  it("rejects bad invocations", () => {
    expect(main([])).toBe(2);
    expect(main(["train-export"])).toBe(2);
    expect(main(["train-export", "--out", "/tmp/x", "--epochs", "zap"])).toBe(2);
    expect(main(["frob"])).toBe(2);
  });
});
