import { describe, expect, it } from "vitest";

import { largestExp, quantizeModel, roundHalfAway } from "../src/quantize.js";
import { DEFAULT_MODEL, FloatModel } from "../src/model.js";

describe("roundHalfAway", () => {
  it("rounds ties away from zero", () => {
    expect(roundHalfAway(0.5)).toBe(1);
    expect(roundHalfAway(-0.5)).toBe(-1);
    expect(roundHalfAway(2.5)).toBe(3);
    expect(roundHalfAway(-2.5)).toBe(-3);
    expect(roundHalfAway(0.49)).toBe(0);
    expect(roundHalfAway(-0.49)).toBe(0);
  });
});

describe("largestExp", () => {
  it("finds the largest power of two that stays under the limit", () => {
    expect(largestExp(1.0, 31)).toBe(4); // 16 <= 31 < 32
    expect(largestExp(1.5, 31)).toBe(4); // 24 <= 31 < 48
    expect(largestExp(0.25, 7)).toBe(4); // 4 <= 7 < 8
    expect(largestExp(8, 7)).toBe(-1); // 4 <= 7 < 8
    expect(largestExp(31, 31)).toBe(0); // exact hit allowed
  });

  it("rejects non-positive magnitudes", () => {
    expect(() => largestExp(0, 7)).toThrow(/positive/);
  });
});

describe("quantizeModel", () => {
  const model: FloatModel = {
    cfg: { ...DEFAULT_MODEL, nInputs: 2, nHidden: 2, nOutputs: 2 },
    // max |w| = 1.5 -> weight exponent 4 at 6 bits (limit 31);
    // thresholds 1.0 -> neuron exponent 10 at 12 bits; min wins -> 4
    w1: new Float64Array([0.5, -1.5, 0.25, 1.0]),
    w2: new Float64Array([1.0, -0.5, 0.75, 0.1]),
  };

  it("applies the joint scale rule and rounds half away", () => {
    const net = quantizeModel(model, {
      name: "q",
      nCycles: 4,
      neuronBits: 12,
      ffBits: 6,
    });
    expect(net.scaleExp).toBe(4);
    expect(Array.from(net.layers[0].wFF)).toEqual([8, -24, 4, 16]);
    expect(Array.from(net.layers[1].wFF)).toEqual([16, -8, 12, 2]);
    expect(net.layers[0].vTh).toBe(16);
    expect(net.layers[1].vTh).toBe(16);
    expect(net.layers[0].model).toBe("lif1");
    expect(net.layers[0].betaShift).toBe(DEFAULT_MODEL.betaShift);
    expect(net.layers[1].model).toBe("if");
    expect(net.layers[1].betaShift).toBeUndefined();
  });

  it("clips weights that round past the rail", () => {
    const hot: FloatModel = {
      ...model,
      // 1.9375 * 16 = 31 exactly at the +rail; exponent stays 4 because
      // 1.9375 * 16 <= 31, and -1.9375 clips to -31 not -32
      w1: new Float64Array([1.9375, -1.9375, 0, 0]),
      w2: new Float64Array([0.5, 0, 0, 0]),
    };
    const net = quantizeModel(hot, {
      name: "q",
      nCycles: 4,
      neuronBits: 12,
      ffBits: 6,
    });
    expect(net.scaleExp).toBe(4);
    expect(net.layers[0].wFF[0]).toBe(31);
    expect(net.layers[0].wFF[1]).toBe(-31);
  });
});
