"""Shipped synthetic benchmark for quantization sweeps.

A linearly separable rate-coding task: input channels are grouped per class,
a sample of class k drives group k at a high Bernoulli rate and all other
channels at a low noise rate, and a single integrate-and-fire layer has one
neuron per class with a strong weight on its own group and a faint positive
weight elsewhere.  Output spike counts then rank the true class first across
a wide range of storage widths, which makes the task a stable reference
point for width sweeps while still degrading at absurdly low precision.

Weights are non-negative and per-neuron absolute weight sums stay below the
firing threshold, so membranes live in [0, v_th + sum|w|]; with the global
scale pinned by v_th this keeps the fixed-point datapath saturation-free at
every width down to rounding collapse.
"""

from __future__ import annotations

import numpy as np

from .codec import rate_encode
from .network import SpikeStream
from .quant import FloatLayer, FloatNetwork


def separable_task(
    n_classes: int = 4,
    group_size: int = 5,
    n_samples: int = 80,
    n_steps: int = 40,
    hi_rate: float = 0.9,
    lo_rate: float = 0.05,
    seed: int = 2301,
) -> tuple[FloatNetwork, list[tuple[SpikeStream, int]]]:
    """Returns (float network, labeled eval set). Fully deterministic."""
    n_in = n_classes * group_size
    w = np.full((n_classes, n_in), 0.05)
    for k in range(n_classes):
        w[k, k * group_size : (k + 1) * group_size] = 0.8
    layer = FloatLayer(
        n_inputs=n_in,
        n_neurons=n_classes,
        model="if",
        reset="subtractive",
        v_th=8.0,
        w_ff=w,
    )
    net = FloatNetwork(
        name="separable", layers=[layer], n_cycles=n_steps, propagation="pipelined"
    )
    eval_set = []
    for s in range(n_samples):
        label = s % n_classes
        rates = np.full(n_in, lo_rate)
        rates[label * group_size : (label + 1) * group_size] = hi_rate
        eval_set.append((rate_encode(rates, n_steps, seed + s), label))
    return net, eval_set
