"""Canned reference networks with reproducible random weights.

Two fixture topologies that exercise the toolchain end to end at realistic
scale: a 784-128-10 feed-forward image classifier shape and a 700-200-20
recurrent audio classifier shape.  Weights are seeded noise, not trained
parameters; the fixtures pin geometry, formats and cycle budgets for
estimation, HDL generation and regression tests.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .fxp import FxpFormat
from .network import LayerSpec, NetworkSpec
from .neuron import NeuronSpec


def _random_weights(rng: np.random.Generator, rows: int, cols: int,
                    fmt: FxpFormat) -> np.ndarray:
    return rng.integers(fmt.min_raw, fmt.max_raw + 1,
                        size=(rows, cols), dtype=np.int64)


def mnist_like(seed: int = 7) -> NetworkSpec:
    """784-128-10 feed-forward net, first-order leaky neurons, 6-bit state,
    4-bit weights, subtractive reset, 100 timesteps."""
    rng = np.random.default_rng(seed)
    neuron_fmt = FxpFormat(total_bits=6)
    ff_fmt = FxpFormat(total_bits=4)

    def layer(n_in: int, n_out: int, v_th: int) -> LayerSpec:
        return LayerSpec(
            n_inputs=n_in,
            n_neurons=n_out,
            neuron=NeuronSpec(
                model="lif1", reset="subtractive", neuron_fmt=neuron_fmt,
                v_th=v_th, v_reset=0, beta_shift=4,
            ),
            w_ff=_random_weights(rng, n_out, n_in, ff_fmt),
            ff_fmt=ff_fmt,
        )

    return NetworkSpec(
        name="mnist_like",
        layers=[layer(784, 128, 15), layer(128, 10, 15)],
        n_cycles=100,
        propagation="pipelined",
    )


def shd_like(seed: int = 11) -> NetworkSpec:
    """700-200-20 recurrent net, second-order leaky neurons, 8-bit state,
    6-bit feed-forward and 5-bit feedback weights, 100 timesteps."""
    rng = np.random.default_rng(seed)
    neuron_fmt = FxpFormat(total_bits=8)
    ff_fmt = FxpFormat(total_bits=6)
    fb_fmt = FxpFormat(total_bits=5)

    def layer(n_in: int, n_out: int, v_th: int) -> LayerSpec:
        return LayerSpec(
            n_inputs=n_in,
            n_neurons=n_out,
            neuron=NeuronSpec(
                model="lif2", reset="subtractive", neuron_fmt=neuron_fmt,
                v_th=v_th, v_reset=0, alpha_shift=3, beta_shift=4,
            ),
            w_ff=_random_weights(rng, n_out, n_in, ff_fmt),
            ff_fmt=ff_fmt,
            w_fb=_random_weights(rng, n_out, n_out, fb_fmt),
            fb_fmt=fb_fmt,
        )

    return NetworkSpec(
        name="shd_like",
        layers=[layer(700, 200, 40), layer(200, 20, 40)],
        n_cycles=100,
        propagation="pipelined",
    )


PRESETS = {"mnist_like": mnist_like, "shd_like": shd_like}


def main(argv: list[str] | None = None) -> int:
    """Write a preset's config and weight files into a directory."""
    import argparse
    from .codec import save_network

    parser = argparse.ArgumentParser(
        prog="python -m snnforge.presets",
        description="write a preset network's config and weights to disk",
    )
    parser.add_argument("preset", choices=sorted(PRESETS))
    parser.add_argument("out_dir")
    args = parser.parse_args(argv)
    spec = PRESETS[args.preset]()
    cfg_path = Path(args.out_dir) / f"{args.preset}.json"
    save_network(spec, cfg_path)
    print(cfg_path)
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
