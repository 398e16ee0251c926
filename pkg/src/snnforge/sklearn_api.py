"""scikit-learn style wrapper around the fixed-point simulator.

The classifier is inference-only: weights come from a prebuilt network
(object or config path), so ``fit`` validates inputs and binds the label
set instead of adjusting parameters.  Requires scikit-learn, which the
core package otherwise does not.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .codec import encode_batch, load_network
from .network import NetworkSpec, SpikeStream, run
from .quant import FloatNetwork, quantize


def _as_streams(X, n_channels: int, encode_steps, encode_seed) -> list[SpikeStream]:
    if isinstance(X, SpikeStream):
        X = [X]
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], SpikeStream):
        streams = list(X)
    else:
        arr = np.asarray(X)
        if arr.ndim == 3:
            streams = [SpikeStream(arr[k].astype(bool)) for k in range(arr.shape[0])]
        elif arr.ndim == 2:
            if encode_steps is None:
                raise ValueError(
                    "2-D rate input needs encode_steps (set it on the estimator)"
                )
            streams = encode_batch(arr, encode_steps, encode_seed)
        else:
            raise ValueError(
                "X must be SpikeStreams, a 3-D spike array, or a 2-D rate array"
            )
    for s in streams:
        if s.n_channels != n_channels:
            raise ValueError(
                f"stream has {s.n_channels} channels, network expects {n_channels}"
            )
    return streams


class SpikingClassifier(BaseEstimator, ClassifierMixin):
    """Classify spike rasters with a prebuilt fixed-point network.

    Parameters mirror the command-line toolchain: ``network`` is a
    NetworkSpec, a FloatNetwork (quantized on fit using the ``*_bits``
    widths), or a path to a saved config.  ``encode_steps``/``encode_seed``
    let ``predict`` accept 2-D rate arrays directly.
    """

    def __init__(
        self,
        network=None,
        *,
        neuron_bits: int | None = None,
        ff_bits: int | None = None,
        fb_bits: int | None = None,
        mode: str | None = None,
        encode_steps: int | None = None,
        encode_seed: int = 0,
    ):
        self.network = network
        self.neuron_bits = neuron_bits
        self.ff_bits = ff_bits
        self.fb_bits = fb_bits
        self.mode = mode
        self.encode_steps = encode_steps
        self.encode_seed = encode_seed

    def _resolve(self) -> NetworkSpec:
        net = self.network
        if net is None:
            raise ValueError("network parameter is required")
        if isinstance(net, (str, Path)):
            net = load_network(net)
        if isinstance(net, FloatNetwork):
            if self.neuron_bits is None or self.ff_bits is None:
                raise ValueError(
                    "float network: set neuron_bits and ff_bits to quantize"
                )
            net = quantize(net, self.neuron_bits, self.ff_bits, self.fb_bits)
        if self.mode is not None:
            net = replace(net, propagation=self.mode)
        return net.canonical()

    def fit(self, X=None, y=None):
        net = self._resolve()
        if y is not None:
            classes = np.unique(np.asarray(y))
            if len(classes) > net.n_outputs:
                raise ValueError(
                    f"{len(classes)} classes but the network has "
                    f"{net.n_outputs} outputs"
                )
            self.classes_ = classes
        else:
            self.classes_ = np.arange(net.n_outputs)
        self.network_ = net
        if X is not None:
            _as_streams(X, net.n_inputs, self.encode_steps, self.encode_seed)
        return self

    def decision_function(self, X) -> np.ndarray:
        """Output spike counts, one row per sample."""
        check_is_fitted(self, "network_")
        streams = _as_streams(
            X, self.network_.n_inputs, self.encode_steps, self.encode_seed
        )
        return np.array([run(self.network_, s).out_counts for s in streams])

    def predict(self, X) -> np.ndarray:
        counts = self.decision_function(X)
        return self.classes_[np.argmax(counts[:, : len(self.classes_)], axis=1)]
