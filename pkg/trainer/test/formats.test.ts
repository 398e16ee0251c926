import { describe, expect, it } from "vitest";

import { writeConfig } from "../src/config.js";
import { FixedNet } from "../src/fixedpoint.js";
import { readRasterText, writeRasterText } from "../src/raster.js";
import { readWeights, writeWeights } from "../src/weightfile.js";

describe("weight files", () => {
  it("emits the exact wire format the toolchain reads", () => {
    const buf = writeWeights(new Int32Array([1, -2, 3, 4]), 2, 2, 4, -2);
    expect(buf.toString("hex")).toBe(
      "534e57540100020000000200000004fe01000000feffffff0300000004000000",
    );
  });

  it("round-trips", () => {
    const values = new Int32Array([0, -8, 7, 1, -1, 5]);
    const buf = writeWeights(values, 3, 2, 5, 3);
    const back = readWeights(buf);
    expect(back.rows).toBe(3);
    expect(back.cols).toBe(2);
    expect(back.bits).toBe(5);
    expect(back.scaleExp).toBe(3);
    expect(Array.from(back.values)).toEqual(Array.from(values));
  });

  it("rejects bad buffers", () => {
    expect(() => readWeights(Buffer.from("nope"))).toThrow(/weight file/);
    const buf = writeWeights(new Int32Array([1]), 1, 1, 4, 0);
    expect(() => readWeights(buf.subarray(0, buf.length - 1))).toThrow(
      /length/,
    );
    expect(() => writeWeights(new Int32Array([1, 2]), 3, 1, 4, 0)).toThrow(
      /expected/,
    );
  });
});

describe("rasters", () => {
  it("writes header plus one row per step, channel 0 leftmost", () => {
    const text = writeRasterText([
      new Uint8Array([1, 0, 0]),
      new Uint8Array([0, 0, 1]),
    ]);
    expect(text).toBe("3 2\n100\n001\n");
  });

  it("round-trips", () => {
    const raster = [
      new Uint8Array([1, 1, 0, 1]),
      new Uint8Array([0, 0, 0, 0]),
      new Uint8Array([1, 0, 1, 0]),
    ];
    const back = readRasterText(writeRasterText(raster));
    expect(back.map((r) => Array.from(r))).toEqual(
      raster.map((r) => Array.from(r)),
    );
  });

  it("rejects malformed text", () => {
    expect(() => readRasterText("x y\n0\n")).toThrow(/header/);
    expect(() => readRasterText("2 2\n10\n")).toThrow(/row count/);
    expect(() => readRasterText("2 2\n10\n1\n")).toThrow(/width/);
    expect(() => readRasterText("2 1\n1x\n")).toThrow(/bad bit/);
  });
});

describe("config", () => {
  it("emits the fixed-point schema with stable key order", () => {
    const net: FixedNet = {
      name: "demo",
      nCycles: 6,
      neuronBits: 8,
      ffBits: 4,
      scaleExp: -3,
      layers: [
        {
          nInputs: 3,
          nNeurons: 2,
          model: "lif1",
          reset: "subtractive",
          vTh: 5,
          vReset: 0,
          betaShift: 2,
          wFF: new Int32Array(6),
        },
      ],
    };
    const text = writeConfig(net);
    expect(text).toBe(writeConfig(net));
    const cfg = JSON.parse(text);
    expect(cfg.parameters).toBe("fixed");
    expect(cfg.encoding).toBe("rate");
    expect(cfg.propagation).toBe("immediate");
    expect(cfg.n_cycles).toBe(6);
    expect(cfg.neuron_bits).toBe(8);
    expect(cfg.ff_weight_bits).toBe(4);
    expect(cfg.scale_exp).toBe(-3);
    expect(cfg.layers[0]).toEqual({
      n_inputs: 3,
      n_neurons: 2,
      model: "lif1",
      reset: "subtractive",
      recurrent: false,
      weights_ff: "demo_l1_ff.wgt",
      v_th: 5,
      v_reset: 0,
      beta_shift: 2,
    });
  });

  it("omits beta_shift for shift-free neurons", () => {
    const net: FixedNet = {
      name: "d2",
      nCycles: 1,
      neuronBits: 8,
      ffBits: 4,
      scaleExp: 0,
      layers: [
        {
          nInputs: 1,
          nNeurons: 1,
          model: "if",
          reset: "static",
          vTh: 1,
          vReset: 0,
          wFF: new Int32Array(1),
        },
      ],
    };
    expect(JSON.parse(writeConfig(net)).layers[0]).not.toHaveProperty(
      "beta_shift",
    );
  });
});
