"""Random network/raster generators shared across test modules.

``random_network`` returns both the package-level NetworkSpec and the plain
dict form consumed by reference_sim, built from the same drawn numbers.

With the defaults (24-bit neurons, |w| <= 15, <= 32 neurons, <= 50 steps,
shifts >= 2) no quantity can approach the 24-bit rails: per-step drive is
bounded by 64*15 = 960, synaptic currents by 2^ka * 960 <= 7680, membranes
by 2^kb * (7680 + 960) well under 2^23.  That keeps the saturating simulator
and the non-saturating oracle bit-identical by construction.
"""

import numpy as np

from snnforge.fxp import FxpFormat
from snnforge.network import LayerSpec, NetworkSpec, SpikeStream
from snnforge.neuron import NeuronSpec

MODELS = ("if", "lif1", "lif2")
RESETS = ("static", "subtractive")


def random_network(
    rng,
    *,
    max_layers=3,
    max_neurons=32,
    max_steps=50,
    neuron_bits=24,
    weight_bits=8,
    wmax=15,
    shift_range=(2, 4),
    vth_range=(0, 300),
    vreset_range=(-50, 50),
    allow_recurrent=True,
    propagation=None,
    name="randnet",
):
    n_layers = int(rng.integers(1, max_layers + 1))
    sizes = [int(rng.integers(1, max_neurons + 1)) for _ in range(n_layers + 1)]
    n_steps = int(rng.integers(1, max_steps + 1))
    if propagation is None:
        propagation = "pipelined" if rng.integers(0, 2) else "immediate"
    nf = FxpFormat(neuron_bits)
    wf = FxpFormat(weight_bits)

    layers = []
    dicts = []
    for k in range(n_layers):
        n_in, n_n = sizes[k], sizes[k + 1]
        model = MODELS[rng.integers(0, 3)]
        reset = RESETS[rng.integers(0, 2)]
        ka = int(rng.integers(shift_range[0], shift_range[1] + 1))
        kb = int(rng.integers(shift_range[0], shift_range[1] + 1))
        v_th = int(rng.integers(vth_range[0], vth_range[1] + 1))
        v_reset = int(rng.integers(vreset_range[0], vreset_range[1] + 1))
        imm = bool(rng.integers(0, 2))
        w_ff = rng.integers(-wmax, wmax + 1, size=(n_n, n_in), dtype=np.int64)
        recurrent = allow_recurrent and bool(rng.integers(0, 2))
        w_fb = (
            rng.integers(-wmax, wmax + 1, size=(n_n, n_n), dtype=np.int64)
            if recurrent
            else None
        )
        spec = NeuronSpec(
            model=model,
            reset=reset,
            neuron_fmt=nf,
            v_th=v_th,
            v_reset=v_reset,
            alpha_shift=ka if model == "lif2" else None,
            beta_shift=kb if model != "if" else None,
            immediate_current=imm,
        )
        layers.append(
            LayerSpec(
                n_inputs=n_in,
                n_neurons=n_n,
                neuron=spec,
                w_ff=w_ff,
                ff_fmt=wf,
                w_fb=w_fb,
                fb_fmt=wf if recurrent else None,
            )
        )
        dicts.append(
            {
                "n_inputs": n_in,
                "n_neurons": n_n,
                "model": model,
                "reset": reset,
                "ka": ka,
                "kb": kb,
                "v_th": v_th,
                "v_reset": v_reset,
                "imm": imm,
                "w_ff": w_ff,
                "w_fb": w_fb,
            }
        )
    net = NetworkSpec(name=name, layers=layers, n_cycles=n_steps, propagation=propagation)
    p = float(rng.uniform(0.0, 0.6))
    raster = (rng.random((n_steps, sizes[0])) < p).astype(np.uint8)
    return net, dicts, SpikeStream(raster)
