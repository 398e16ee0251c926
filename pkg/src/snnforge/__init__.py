"""snnforge: a workbench for clock-driven spiking network accelerators.

Bit-exact fixed-point simulation, quantization and bit-width sweeps,
memory/latency estimation, and structural VHDL generation for multi-layer
(optionally recurrent) integrate-and-fire networks.

The scikit-learn facade lives in :mod:`snnforge.sklearn_api` and is not
imported here so the core package works without scikit-learn.
"""

from .codec import (
    ConfigError,
    DataError,
    encode_batch,
    load_dataset,
    load_network,
    load_raster,
    load_vectors,
    load_weights,
    rate_encode,
    save_dataset,
    save_network,
    save_raster,
    save_weights,
)
from .estimate import (
    BUILTIN_DEVICES,
    Device,
    LatencyEstimate,
    ResourceReport,
    bram_count,
    estimate_network,
    get_device,
    load_device_catalog,
    max_hidden_size,
    predict_latency,
)
from .fxp import FxpFormat
from .hdlgen import generate, write_bundle
from .hdllint import lint_bundle
from .network import (
    CycleModel,
    LayerActivity,
    LayerSpec,
    NetworkSpec,
    RunReport,
    SpikeStream,
    run,
)
from .neuron import NeuronSpec
from .quant import (
    FloatLayer,
    FloatNetwork,
    SweepResult,
    SweepRow,
    evaluate,
    quantize,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_DEVICES",
    "ConfigError",
    "CycleModel",
    "DataError",
    "Device",
    "FloatLayer",
    "FloatNetwork",
    "FxpFormat",
    "LatencyEstimate",
    "LayerActivity",
    "LayerSpec",
    "NetworkSpec",
    "NeuronSpec",
    "ResourceReport",
    "RunReport",
    "SpikeStream",
    "SweepResult",
    "SweepRow",
    "bram_count",
    "encode_batch",
    "estimate_network",
    "evaluate",
    "generate",
    "get_device",
    "lint_bundle",
    "load_dataset",
    "load_device_catalog",
    "load_network",
    "load_raster",
    "load_vectors",
    "load_weights",
    "max_hidden_size",
    "predict_latency",
    "quantize",
    "rate_encode",
    "run",
    "save_dataset",
    "save_network",
    "save_raster",
    "save_weights",
    "sweep",
    "write_bundle",
]
