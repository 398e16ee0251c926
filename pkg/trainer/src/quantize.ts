/**
 * Map a trained float model onto the fixed-point formats the toolchain
 * runs. The scale rule matches the toolchain's own quantizer: one global
 * power-of-two exponent, the largest that keeps every weight inside the
 * weight format and every threshold inside the neuron format; rounding is
 * half away from zero.
 */

import { FixedLayer, FixedNet, clampToBits } from "./fixedpoint.js";
import { FloatModel } from "./model.js";

export function roundHalfAway(x: number): number {
  const r = Math.trunc(x + (x >= 0 ? 0.5 : -0.5));
  return r === 0 ? 0 : r; // never -0
}

/** Largest f with maxAbs * 2^f <= limit (power-of-two products are exact). */
export function largestExp(maxAbs: number, limit: number): number {
  if (!(maxAbs > 0)) throw new Error("maxAbs must be positive");
  let f = Math.floor(Math.log2(limit) - Math.log2(maxAbs));
  while (maxAbs * 2 ** (f + 1) <= limit) f += 1;
  while (maxAbs * 2 ** f > limit) f -= 1;
  return f;
}

export interface QuantizeOptions {
  name: string;
  nCycles: number;
  neuronBits: number;
  ffBits: number;
}

export function quantizeModel(model: FloatModel, opts: QuantizeOptions): FixedNet {
  const { cfg } = model;
  const ffMax = 2 ** (opts.ffBits - 1) - 1;
  const neuronMax = 2 ** (opts.neuronBits - 1) - 1;

  let maxW = 0;
  for (const w of model.w1) maxW = Math.max(maxW, Math.abs(w));
  for (const w of model.w2) maxW = Math.max(maxW, Math.abs(w));
  const maxTh = Math.max(Math.abs(cfg.hiddenTh), Math.abs(cfg.outputTh));
  const f = Math.min(largestExp(maxW, ffMax), largestExp(maxTh, neuronMax));
  const scale = 2 ** f;

  const quantWeights = (w: Float64Array): Int32Array => {
    const out = new Int32Array(w.length);
    for (let i = 0; i < w.length; i++) {
      out[i] = clampToBits(roundHalfAway(w[i] * scale), opts.ffBits);
    }
    return out;
  };
  const quantTh = (th: number): number =>
    clampToBits(roundHalfAway(th * scale), opts.neuronBits);

  const hidden: FixedLayer = {
    nInputs: cfg.nInputs,
    nNeurons: cfg.nHidden,
    model: "lif1",
    reset: "subtractive",
    vTh: quantTh(cfg.hiddenTh),
    vReset: 0,
    betaShift: cfg.betaShift,
    wFF: quantWeights(model.w1),
  };
  const output: FixedLayer = {
    nInputs: cfg.nHidden,
    nNeurons: cfg.nOutputs,
    model: "if",
    reset: "static",
    vTh: quantTh(cfg.outputTh),
    vReset: 0,
    wFF: quantWeights(model.w2),
  };
  return {
    name: opts.name,
    nCycles: opts.nCycles,
    neuronBits: opts.neuronBits,
    ffBits: opts.ffBits,
    scaleExp: f,
    layers: [hidden, output],
  };
}
