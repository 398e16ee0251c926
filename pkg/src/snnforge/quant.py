"""Quantization of float-parameter networks into fixed-point specs.

One global power-of-two scale is chosen per network: the largest exponent
``f`` such that every parameter class still fits its storage format, i.e.
``max|w_ff| * 2**f <= ff_max``, ``max|w_fb| * 2**f <= fb_max`` and
``max(|v_th|, |v_reset|) * 2**f <= neuron_max``, taking the minimum over the
classes present.  Parameters then map to ``round(value * 2**f)`` with
round-half-away-from-zero, clamped into their format.  Keeping a single
scale means thresholds and weights stay mutually comparable, which is what
the saturating datapath assumes.

Exponential decay constants become shift amounts via ``round_decay``:
``k = round(-log2(1 - c))`` clamped to [1, neuron_bits], realizing
``1 - 2**-k``.  The realized constants are what an exporter should train
against; ``realized_decay`` reports them.

``sweep`` re-quantizes one width dimension (neuron membrane, feed-forward
weights, or feedback weights) across a list of widths while the other
dimensions stay at the reference width, and evaluates classification
accuracy on a labeled raster set.  Evaluation is integer simulation, so
every sweep row is exactly reproducible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .fxp import FxpFormat
from .network import LayerSpec, NetworkSpec, SpikeStream, classify, run
from .neuron import MODELS, RESETS, NeuronSpec

SWEEP_DIMENSIONS = ("neuron", "ff", "fb")


@dataclass(eq=False)
class FloatLayer:
    n_inputs: int
    n_neurons: int
    model: str
    reset: str
    v_th: float
    v_reset: float = 0.0
    alpha: float | None = None
    beta: float | None = None
    w_ff: np.ndarray = None
    w_fb: np.ndarray | None = None
    immediate_current: bool = False

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.reset not in RESETS:
            raise ValueError(f"unknown reset {self.reset!r}")
        need_alpha = self.model == "lif2"
        need_beta = self.model in ("lif1", "lif2")
        if need_alpha != (self.alpha is not None):
            raise ValueError(f"model {self.model!r}: alpha "
                             + ("required" if need_alpha else "not allowed"))
        if need_beta != (self.beta is not None):
            raise ValueError(f"model {self.model!r}: beta "
                             + ("required" if need_beta else "not allowed"))
        for nm, c in (("alpha", self.alpha), ("beta", self.beta)):
            if c is not None and not 0.0 < c < 1.0:
                raise ValueError(f"{nm} must lie strictly in (0, 1), got {c}")
        for nm, x in (("v_th", self.v_th), ("v_reset", self.v_reset)):
            if not math.isfinite(x):
                raise ValueError(f"{nm} must be finite")
        self.w_ff = self._check_w(self.w_ff, (self.n_neurons, self.n_inputs), "w_ff")
        if self.w_fb is not None:
            self.w_fb = self._check_w(self.w_fb, (self.n_neurons, self.n_neurons), "w_fb")

    @staticmethod
    def _check_w(w, shape, what) -> np.ndarray:
        if w is None:
            raise ValueError(f"{what} is required")
        arr = np.asarray(w, dtype=np.float64)
        if arr.shape != shape:
            raise ValueError(f"{what} must have shape {shape}, got {arr.shape}")
        if arr.size and not np.isfinite(arr).all():
            raise ValueError(f"{what} contains non-finite entries")
        return arr

    @property
    def recurrent(self) -> bool:
        return self.w_fb is not None


@dataclass(eq=False)
class FloatNetwork:
    name: str
    layers: list[FloatLayer]
    n_cycles: int
    propagation: str = "pipelined"

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValueError("network needs at least one layer")
        if self.n_cycles < 1:
            raise ValueError("n_cycles must be >= 1")
        if self.propagation not in ("pipelined", "immediate"):
            raise ValueError(f"unknown propagation {self.propagation!r}")
        for k in range(1, len(self.layers)):
            if self.layers[k].n_inputs != self.layers[k - 1].n_neurons:
                raise ValueError(
                    f"layer {k + 1} expects {self.layers[k].n_inputs} inputs but "
                    f"layer {k} has {self.layers[k - 1].n_neurons} neurons"
                )

    @property
    def recurrent(self) -> bool:
        return any(l.recurrent for l in self.layers)


def round_decay(c: float, max_shift: int = 32) -> int:
    """Shift realizing a decay constant: round(-log2(1-c)), clamped >= 1."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"decay constant must lie strictly in (0, 1), got {c}")
    if max_shift < 1:
        raise ValueError("max_shift must be >= 1")
    k = round(-math.log2(1.0 - c))
    return min(max(k, 1), max_shift)


def realized_decay(shift: int) -> float:
    """The constant actually implemented by a decay shift."""
    if shift < 1:
        raise ValueError("shift must be >= 1")
    return 1.0 - math.ldexp(1.0, -shift)


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest with ties away from zero (not banker's)."""
    x = np.asarray(x, dtype=np.float64)
    return np.trunc(x + np.copysign(0.5, x)).astype(np.int64)


def _largest_exp(max_abs: float, limit: int) -> int:
    """Largest f with max_abs * 2**f <= limit (exact ldexp comparisons)."""
    f = int(math.floor(math.log2(limit) - math.log2(max_abs)))
    while math.ldexp(max_abs, f + 1) <= limit:
        f += 1
    while math.ldexp(max_abs, f) > limit:
        f -= 1
    return f


def select_scale_exp(net: FloatNetwork, neuron_bits: int, ff_bits: int,
                     fb_bits: int | None) -> int:
    """Global power-of-two exponent over weights and thresholds jointly."""
    candidates = []
    max_ff = max((np.abs(l.w_ff).max() if l.w_ff.size else 0.0) for l in net.layers)
    if max_ff > 0:
        candidates.append(_largest_exp(max_ff, FxpFormat(ff_bits).max_raw))
    fb_mats = [l.w_fb for l in net.layers if l.recurrent]
    if fb_mats:
        max_fb = max((np.abs(m).max() if m.size else 0.0) for m in fb_mats)
        if max_fb > 0:
            candidates.append(_largest_exp(max_fb, FxpFormat(fb_bits).max_raw))
    max_th = max(max(abs(l.v_th), abs(l.v_reset)) for l in net.layers)
    if max_th > 0:
        candidates.append(_largest_exp(max_th, FxpFormat(neuron_bits).max_raw))
    if not candidates:
        warnings.warn("all parameters are zero; scale selection degenerates to 1.0")
        return 0
    f = min(candidates)
    if not -64 <= f <= 64:
        warnings.warn(f"scale exponent {f} clamped into [-64, 64]")
        f = min(max(f, -64), 64)
    return f


def quantize(net: FloatNetwork, neuron_bits: int, ff_bits: int,
             fb_bits: int | None = None) -> NetworkSpec:
    """Map a float network onto fixed-point formats; returns a runnable spec
    with ``scale_exp`` recording the chosen global scale."""
    if net.recurrent and fb_bits is None:
        raise ValueError("fb_bits is required for recurrent networks")
    nfmt = FxpFormat(neuron_bits)
    ffmt = FxpFormat(ff_bits)
    bfmt = FxpFormat(fb_bits) if fb_bits is not None else None
    f = select_scale_exp(net, neuron_bits, ff_bits, fb_bits)
    scale = math.ldexp(1.0, f)

    def to_raw(x: float, fmt: FxpFormat) -> int:
        raw = int(round_half_away(np.array(x * scale)))
        return min(max(raw, fmt.min_raw), fmt.max_raw)

    layers = []
    for l in net.layers:
        w_ff = np.clip(round_half_away(l.w_ff * scale), ffmt.min_raw, ffmt.max_raw)
        w_fb = None
        if l.recurrent:
            w_fb = np.clip(round_half_away(l.w_fb * scale), bfmt.min_raw, bfmt.max_raw)
        neuron = NeuronSpec(
            model=l.model,
            reset=l.reset,
            neuron_fmt=nfmt,
            v_th=to_raw(l.v_th, nfmt),
            v_reset=to_raw(l.v_reset, nfmt),
            alpha_shift=round_decay(l.alpha, neuron_bits) if l.alpha is not None else None,
            beta_shift=round_decay(l.beta, neuron_bits) if l.beta is not None else None,
            immediate_current=l.immediate_current,
        )
        layers.append(
            LayerSpec(
                n_inputs=l.n_inputs, n_neurons=l.n_neurons, neuron=neuron,
                w_ff=w_ff, ff_fmt=ffmt,
                w_fb=w_fb, fb_fmt=bfmt if l.recurrent else None,
            )
        )
    return NetworkSpec(
        name=net.name, layers=layers, n_cycles=net.n_cycles,
        propagation=net.propagation, scale_exp=f,
    )


def evaluate(spec: NetworkSpec, eval_set, **run_kwargs) -> float:
    """Classification accuracy of a fixed network on [(stream, label)]."""
    eval_set = list(eval_set)
    if not eval_set:
        raise ValueError("eval_set must not be empty")
    hits = 0
    for stream, label in eval_set:
        rep = run(spec, stream, **run_kwargs)
        hits += int(classify(rep.out_counts) == int(label))
    return hits / len(eval_set)


@dataclass
class SweepRow:
    neuron_bits: int
    ff_bits: int
    fb_bits: int | None
    swept_bits: int
    accuracy: float
    scale_exp: int


@dataclass
class SweepResult:
    dimension: str
    rows: list[SweepRow]
    reference: SweepRow

    def to_csv(self) -> str:
        lines = ["dimension,bits,accuracy"]
        for r in self.rows:
            lines.append(f"{self.dimension},{r.swept_bits},{r.accuracy:.6f}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        def row(r: SweepRow) -> dict:
            return {
                "neuron_bits": r.neuron_bits,
                "ff_bits": r.ff_bits,
                "fb_bits": r.fb_bits,
                "swept_bits": r.swept_bits,
                "accuracy": r.accuracy,
                "scale_exp": r.scale_exp,
            }

        return {
            "dimension": self.dimension,
            "rows": [row(r) for r in self.rows],
            "reference": row(self.reference),
        }


DEFAULT_SWEEP_WIDTHS = tuple(range(32, 0, -1))


def sweep(net: FloatNetwork, eval_set, dimension: str, widths=None,
          base_bits: int | None = None, **run_kwargs) -> SweepResult:
    """Accuracy across bit widths of one dimension, others at the reference.

    The reference row quantizes every dimension at ``base_bits`` (default:
    the largest swept width), so when the sweep list includes that width the
    corresponding row equals the reference exactly.
    """
    if dimension not in SWEEP_DIMENSIONS:
        raise ValueError(f"dimension must be one of {SWEEP_DIMENSIONS}")
    if dimension == "fb" and not net.recurrent:
        raise ValueError("fb sweep requires a recurrent network")
    widths = list(widths) if widths is not None else list(DEFAULT_SWEEP_WIDTHS)
    if not widths:
        raise ValueError("widths must not be empty")
    for w in widths:
        if not 1 <= w <= 32:
            raise ValueError(f"width {w} outside 1..32")
    base = base_bits if base_bits is not None else max(widths)
    if not 1 <= base <= 32:
        raise ValueError(f"base_bits {base} outside 1..32")
    eval_set = list(eval_set)
    fb_base = base if net.recurrent else None

    def point(neuron_b, ff_b, fb_b, swept) -> SweepRow:
        spec = quantize(net, neuron_b, ff_b, fb_b)
        acc = evaluate(spec, eval_set, **run_kwargs)
        return SweepRow(
            neuron_bits=neuron_b, ff_bits=ff_b, fb_bits=fb_b,
            swept_bits=swept, accuracy=acc, scale_exp=spec.scale_exp,
        )

    reference = point(base, base, fb_base, base)
    rows = []
    for w in widths:
        neuron_b, ff_b, fb_b = base, base, fb_base
        if dimension == "neuron":
            neuron_b = w
        elif dimension == "ff":
            ff_b = w
        else:
            fb_b = w
        rows.append(point(neuron_b, ff_b, fb_b, w))
    return SweepResult(dimension=dimension, rows=rows, reference=reference)
