/**
 * Float-side trainer: a two-layer spiking classifier (LIF hidden layer,
 * integrate-and-fire output layer) trained with a fast-sigmoid surrogate
 * gradient through time.
 *
 * The hidden decay is fixed to `1 - 2^-betaShift` from the start, so the
 * float dynamics already use exactly the leak the hardware will implement;
 * quantization later only rounds weights and thresholds. Resets are
 * detached in the backward pass (gradients flow through the membrane as if
 * no reset happened), the usual BPTT-lite compromise.
 */

import { Rng } from "./rng.js";
import { Sample } from "./glyphs.js";

export interface ModelConfig {
  nInputs: number;
  nHidden: number;
  nOutputs: number;
  betaShift: number;
  hiddenTh: number;
  outputTh: number;
  logitScale: number;
  surrogateSlope: number;
}

export const DEFAULT_MODEL: ModelConfig = {
  nInputs: 64,
  nHidden: 48,
  nOutputs: 10,
  betaShift: 2,
  hiddenTh: 1.0,
  outputTh: 1.0,
  logitScale: 0.5,
  surrogateSlope: 4.0,
};

export interface FloatModel {
  cfg: ModelConfig;
  /** Row-major (nHidden x nInputs). */
  w1: Float64Array;
  /** Row-major (nOutputs x nHidden). */
  w2: Float64Array;
}

export function initModel(cfg: ModelConfig, rng: Rng): FloatModel {
  const w1 = new Float64Array(cfg.nHidden * cfg.nInputs);
  const w2 = new Float64Array(cfg.nOutputs * cfg.nHidden);
  const s1 = 1 / Math.sqrt(cfg.nInputs);
  const s2 = 1 / Math.sqrt(cfg.nHidden);
  for (let i = 0; i < w1.length; i++) w1[i] = rng.gauss() * s1;
  for (let i = 0; i < w2.length; i++) w2[i] = rng.gauss() * s2;
  return { cfg, w1, w2 };
}

interface Trace {
  /** Pre-reset potentials per step. */
  u1: Float64Array[];
  u2: Float64Array[];
  s1: Uint8Array[];
  counts: Float64Array;
}

function forward(model: FloatModel, raster: Uint8Array[]): Trace {
  const { cfg, w1, w2 } = model;
  const beta = 1 - 2 ** -cfg.betaShift;
  const v1 = new Float64Array(cfg.nHidden);
  const v2 = new Float64Array(cfg.nOutputs);
  const trace: Trace = { u1: [], u2: [], s1: [], counts: new Float64Array(cfg.nOutputs) };

  for (const x of raster) {
    const u1 = new Float64Array(cfg.nHidden);
    const s1 = new Uint8Array(cfg.nHidden);
    for (let h = 0; h < cfg.nHidden; h++) {
      let drive = 0;
      const row = h * cfg.nInputs;
      for (let c = 0; c < cfg.nInputs; c++) if (x[c]) drive += w1[row + c];
      const u = beta * v1[h] + drive;
      u1[h] = u;
      if (u > cfg.hiddenTh) {
        s1[h] = 1;
        v1[h] = u - cfg.hiddenTh;
      } else {
        v1[h] = u;
      }
    }
    const u2 = new Float64Array(cfg.nOutputs);
    for (let o = 0; o < cfg.nOutputs; o++) {
      let drive = 0;
      const row = o * cfg.nHidden;
      for (let h = 0; h < cfg.nHidden; h++) if (s1[h]) drive += w2[row + h];
      const u = v2[o] + drive;
      u2[o] = u;
      if (u > cfg.outputTh) {
        trace.counts[o] += 1;
        v2[o] = 0;
      } else {
        v2[o] = u;
      }
    }
    trace.u1.push(u1);
    trace.u2.push(u2);
    trace.s1.push(s1);
  }
  return trace;
}

/** d(spike)/d(membrane) stand-in: fast sigmoid 1 / (1 + a|x|)^2. */
function surrogate(x: number, slope: number): number {
  const d = 1 + slope * Math.abs(x);
  return 1 / (d * d);
}

function softmax(logits: Float64Array): Float64Array {
  let max = -Infinity;
  for (const v of logits) if (v > max) max = v;
  let sum = 0;
  const out = new Float64Array(logits.length);
  for (let i = 0; i < logits.length; i++) {
    out[i] = Math.exp(logits[i] - max);
    sum += out[i];
  }
  for (let i = 0; i < out.length; i++) out[i] /= sum;
  return out;
}

export interface Gradients {
  w1: Float64Array;
  w2: Float64Array;
  loss: number;
  predicted: number;
}

/** Backward pass over one sample; cross-entropy on scaled spike counts. */
export function backward(model: FloatModel, sample: Sample): Gradients {
  const { cfg, w2 } = model;
  const trace = forward(model, sample.raster);
  const T = sample.raster.length;

  const logits = new Float64Array(cfg.nOutputs);
  for (let o = 0; o < cfg.nOutputs; o++) logits[o] = trace.counts[o] * cfg.logitScale;
  const probs = softmax(logits);
  const loss = -Math.log(Math.max(probs[sample.label], 1e-12));
  const dCounts = new Float64Array(cfg.nOutputs);
  for (let o = 0; o < cfg.nOutputs; o++) {
    dCounts[o] = (probs[o] - (o === sample.label ? 1 : 0)) * cfg.logitScale;
  }

  const gw1 = new Float64Array(model.w1.length);
  const gw2 = new Float64Array(model.w2.length);
  const beta = 1 - 2 ** -cfg.betaShift;
  let g2next = new Float64Array(cfg.nOutputs);
  let g1next = new Float64Array(cfg.nHidden);

  for (let t = T - 1; t >= 0; t--) {
    const u1 = trace.u1[t];
    const u2 = trace.u2[t];
    const s1 = trace.s1[t];
    const x = sample.raster[t];

    const g2 = new Float64Array(cfg.nOutputs);
    for (let o = 0; o < cfg.nOutputs; o++) {
      g2[o] =
        dCounts[o] * surrogate(u2[o] - cfg.outputTh, cfg.surrogateSlope) +
        g2next[o];
    }
    const ds1 = new Float64Array(cfg.nHidden);
    for (let o = 0; o < cfg.nOutputs; o++) {
      const row = o * cfg.nHidden;
      const g = g2[o];
      if (g === 0) continue;
      for (let h = 0; h < cfg.nHidden; h++) {
        gw2[row + h] += g * s1[h];
        ds1[h] += g * w2[row + h];
      }
    }
    const g1 = new Float64Array(cfg.nHidden);
    for (let h = 0; h < cfg.nHidden; h++) {
      g1[h] =
        ds1[h] * surrogate(u1[h] - cfg.hiddenTh, cfg.surrogateSlope) +
        beta * g1next[h];
    }
    for (let h = 0; h < cfg.nHidden; h++) {
      const row = h * cfg.nInputs;
      const g = g1[h];
      if (g === 0) continue;
      for (let c = 0; c < cfg.nInputs; c++) if (x[c]) gw1[row + c] += g;
    }
    g2next = g2;
    g1next = g1;
  }
  let predicted = 0;
  for (let o = 1; o < cfg.nOutputs; o++) {
    if (trace.counts[o] > trace.counts[predicted]) predicted = o;
  }
  return { w1: gw1, w2: gw2, loss, predicted };
}

class Adam {
  private m: Float64Array;
  private v: Float64Array;
  private t = 0;

  constructor(
    size: number,
    private lr: number,
    private b1 = 0.9,
    private b2 = 0.999,
    private eps = 1e-8,
  ) {
    this.m = new Float64Array(size);
    this.v = new Float64Array(size);
  }

  step(weights: Float64Array, grads: Float64Array): void {
    this.t += 1;
    const c1 = 1 - this.b1 ** this.t;
    const c2 = 1 - this.b2 ** this.t;
    for (let i = 0; i < weights.length; i++) {
      const g = grads[i];
      this.m[i] = this.b1 * this.m[i] + (1 - this.b1) * g;
      this.v[i] = this.b2 * this.v[i] + (1 - this.b2) * g * g;
      weights[i] -= (this.lr * (this.m[i] / c1)) / (Math.sqrt(this.v[i] / c2) + this.eps);
    }
  }
}

export interface TrainOptions {
  epochs: number;
  lr: number;
  seed: number;
}

export interface EpochStats {
  epoch: number;
  meanLoss: number;
  trainAccuracy: number;
}

/** Train in place; returns per-epoch stats. */
export function train(
  model: FloatModel,
  samples: Sample[],
  opts: TrainOptions,
): EpochStats[] {
  const rng = new Rng(opts.seed);
  const adam1 = new Adam(model.w1.length, opts.lr);
  const adam2 = new Adam(model.w2.length, opts.lr);
  const order = samples.map((_, i) => i);
  const stats: EpochStats[] = [];

  for (let epoch = 0; epoch < opts.epochs; epoch++) {
    for (let i = order.length - 1; i > 0; i--) {
      const j = rng.int(i + 1);
      [order[i], order[j]] = [order[j], order[i]];
    }
    let lossSum = 0;
    let hits = 0;
    for (const idx of order) {
      const sample = samples[idx];
      const g = backward(model, sample);
      adam1.step(model.w1, g.w1);
      adam2.step(model.w2, g.w2);
      lossSum += g.loss;
      if (g.predicted === sample.label) hits += 1;
    }
    stats.push({
      epoch,
      meanLoss: lossSum / samples.length,
      trainAccuracy: hits / samples.length,
    });
  }
  return stats;
}

export function predict(model: FloatModel, raster: Uint8Array[]): number {
  const counts = forward(model, raster).counts;
  let best = 0;
  for (let k = 1; k < counts.length; k++) if (counts[k] > counts[best]) best = k;
  return best;
}

export function accuracy(model: FloatModel, samples: Sample[]): number {
  let hits = 0;
  for (const s of samples) if (predict(model, s.raster) === s.label) hits += 1;
  return hits / samples.length;
}
