"""Exact-integer reference simulator used as the test oracle.

Implements the layer update rules directly on int64 with *no* saturation
anywhere, against plain dict/array descriptions of a network (so it shares
no code with the package under test):

    win   = sum of feed-forward weights at spiking inputs
            + sum of feedback weights at the layer's previous-step spikes
    if:    v' = v + win
    lif1:  v' = (v - (v >> kb)) + win
    lif2:  i' = (i - (i >> ka)) + win
           v' = (v - (v >> kb)) + i          (previous-step current;
                                              i' instead when "immediate")
    spike = v' > v_th   (strict)
    reset: static -> v_reset;  subtractive -> v' - v_th

Wiring: "pipelined" feeds each layer its predecessor's previous-step output,
"immediate" the same-step output.  Feedback is always previous-step.

Only valid when the modeled net never saturates; generators used with this
oracle must keep magnitudes inside the fixed-point range.
"""

import numpy as np


def simulate(layers, raster, mode="pipelined"):
    """layers: list of dicts with keys n_inputs, n_neurons, model, reset,
    ka, kb, v_th, v_reset, imm, w_ff, w_fb (None when absent).
    raster: uint8 (n_steps, n_inputs).  Returns (counts, out_rows, v_traces).
    """
    n_steps = raster.shape[0]
    L = len(layers)
    v = [np.zeros(l["n_neurons"], dtype=np.int64) for l in layers]
    i = [np.zeros(l["n_neurons"], dtype=np.int64) for l in layers]
    prev = [np.zeros(l["n_neurons"], dtype=np.uint8) for l in layers]
    out_rows = np.zeros((n_steps, layers[-1]["n_neurons"]), dtype=np.uint8)
    v_traces = [np.zeros((n_steps, l["n_neurons"]), dtype=np.int64) for l in layers]

    for n in range(n_steps):
        if mode == "pipelined":
            ins = [raster[n]] + [prev[k].copy() for k in range(L - 1)]
        cur = raster[n]
        for k, l in enumerate(layers):
            x = (ins[k] if mode == "pipelined" else cur).astype(np.int64)
            win = l["w_ff"] @ x
            if l["w_fb"] is not None:
                win = win + l["w_fb"] @ prev[k].astype(np.int64)
            if l["model"] == "if":
                v_new = v[k] + win
            elif l["model"] == "lif1":
                v_new = (v[k] - (v[k] >> l["kb"])) + win
            else:
                i_new = (i[k] - (i[k] >> l["ka"])) + win
                drive = i_new if l["imm"] else i[k]
                v_new = (v[k] - (v[k] >> l["kb"])) + drive
                i[k] = i_new
            spikes = v_new > l["v_th"]
            if l["reset"] == "static":
                v[k] = np.where(spikes, np.int64(l["v_reset"]), v_new)
            else:
                v[k] = np.where(spikes, v_new - l["v_th"], v_new)
            prev[k] = spikes.astype(np.uint8)
            if mode != "pipelined":
                cur = prev[k]
            v_traces[k][n] = v[k]
        out_rows[n] = prev[-1]

    counts = out_rows.sum(axis=0, dtype=np.int64)
    return counts, out_rows, v_traces
