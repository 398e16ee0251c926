/**
 * Integer forward pass matching the snnforge simulator bit for bit, for the
 * network subset this trainer exports: feed-forward layers, `if` or `lif1`
 * neurons, immediate propagation.
 *
 * Semantics mirrored exactly:
 *  - all state lives in saturating two's complement of `neuronBits`;
 *  - input accumulation is sequential, one spiking column at a time in
 *    ascending order, each partial sum clamped;
 *  - leak is `v - (v >> k)` (arithmetic shift), applied before the drive,
 *    with a single clamp on the result;
 *  - a neuron fires on `v > vTh` strictly; `static` reset jumps to vReset,
 *    `subtractive` reset clamps `v - vTh`.
 *
 * Widths stay at or below 16 bits here, so plain JS 32-bit `>>` arithmetic
 * is exact.
 */

export interface FixedLayer {
  nInputs: number;
  nNeurons: number;
  model: "if" | "lif1";
  reset: "static" | "subtractive";
  vTh: number;
  vReset: number;
  betaShift?: number;
  /** Row-major (nNeurons x nInputs) raw weights. */
  wFF: Int32Array;
}

export interface FixedNet {
  name: string;
  nCycles: number;
  neuronBits: number;
  ffBits: number;
  scaleExp: number;
  layers: FixedLayer[];
}

export function clampToBits(v: number, bits: number): number {
  const hi = 2 ** (bits - 1) - 1;
  const lo = -(2 ** (bits - 1));
  return v > hi ? hi : v < lo ? lo : v;
}

/** One decay step: v minus its arithmetic right shift, never overflows. */
export function decay(v: number, shift: number): number {
  return v - (v >> shift);
}

/**
 * Sequentially accumulate the weights of spiking columns into `bits`-wide
 * saturating registers, starting from zero.
 */
export function accumulate(
  layer: FixedLayer,
  spikes: Uint8Array,
  bits: number,
): Int32Array {
  const acc = new Int32Array(layer.nNeurons);
  for (let c = 0; c < layer.nInputs; c++) {
    if (!spikes[c]) continue;
    for (let n = 0; n < layer.nNeurons; n++) {
      acc[n] = clampToBits(acc[n] + layer.wFF[n * layer.nInputs + c], bits);
    }
  }
  return acc;
}

/** Mutable per-layer membrane state. */
export type LayerState = Int32Array;

/** Advance one layer by one step; returns its output spikes. */
export function stepLayer(
  layer: FixedLayer,
  state: LayerState,
  inSpikes: Uint8Array,
  bits: number,
): Uint8Array {
  const win = accumulate(layer, inSpikes, bits);
  const out = new Uint8Array(layer.nNeurons);
  for (let n = 0; n < layer.nNeurons; n++) {
    const leaked =
      layer.model === "lif1" ? decay(state[n], layer.betaShift!) : state[n];
    const v = clampToBits(leaked + win[n], bits);
    if (v > layer.vTh) {
      out[n] = 1;
      state[n] =
        layer.reset === "static"
          ? layer.vReset
          : clampToBits(v - layer.vTh, bits);
    } else {
      state[n] = v;
    }
  }
  return out;
}

/**
 * Run a raster (nCycles x nInputs, 0/1 per step) through the network in
 * immediate mode and return per-output spike counts.
 */
export function runCounts(net: FixedNet, raster: Uint8Array[]): number[] {
  if (raster.length !== net.nCycles) {
    throw new Error(`raster has ${raster.length} steps, net wants ${net.nCycles}`);
  }
  const states = net.layers.map((l) => new Int32Array(l.nNeurons));
  const last = net.layers[net.layers.length - 1];
  const counts = new Array<number>(last.nNeurons).fill(0);
  for (let t = 0; t < net.nCycles; t++) {
    let x = raster[t];
    for (let k = 0; k < net.layers.length; k++) {
      x = stepLayer(net.layers[k], states[k], x, net.neuronBits);
    }
    for (let n = 0; n < last.nNeurons; n++) counts[n] += x[n];
  }
  return counts;
}

/** Argmax with first-index tie break, same rule the toolchain applies. */
export function classify(counts: number[]): number {
  let best = 0;
  for (let k = 1; k < counts.length; k++) {
    if (counts[k] > counts[best]) best = k;
  }
  return best;
}
