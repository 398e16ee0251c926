/**
 * Network config JSON in the toolchain's fixed-point schema. Key order is
 * fixed so repeated exports are byte-identical.
 */

import { FixedNet } from "./fixedpoint.js";

/** Weight file name for layer k (1-indexed), as referenced by the config. */
export function weightFileName(netName: string, layerIndex: number): string {
  return `${netName}_l${layerIndex}_ff.wgt`;
}

export function writeConfig(net: FixedNet): string {
  const layers = net.layers.map((l, k) => {
    const entry: Record<string, unknown> = {
      n_inputs: l.nInputs,
      n_neurons: l.nNeurons,
      model: l.model,
      reset: l.reset,
      recurrent: false,
      weights_ff: weightFileName(net.name, k + 1),
      v_th: l.vTh,
      v_reset: l.vReset,
    };
    if (l.betaShift !== undefined) entry.beta_shift = l.betaShift;
    return entry;
  });
  const cfg = {
    name: net.name,
    n_cycles: net.nCycles,
    propagation: "immediate",
    parameters: "fixed",
    encoding: "rate",
    neuron_bits: net.neuronBits,
    ff_weight_bits: net.ffBits,
    scale_exp: net.scaleExp,
    layers,
  };
  return JSON.stringify(cfg, null, 2) + "\n";
}
