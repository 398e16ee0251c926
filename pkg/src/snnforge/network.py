"""Clock-driven simulation of layered spiking networks.

The simulator mirrors the generated hardware's control structure: a network
control unit starts every layer once per timestep and waits for all of them,
and each layer delivers its input spikes sequentially, one clock per input.
Cycle accounting follows that structure:

* a layer-step with no input and no feedback spikes costs ``c_idle`` (one
  decay-only cycle, the OR-gate skip);
* an active layer-step costs ``n_inputs`` (if any feed-forward spike) plus
  ``n_neurons`` (if recurrent and any feedback spike) plus ``c_act``; the
  cost is popcount-independent because every address is still visited;
* every timestep adds ``c_net`` for the network-level handshake, and the
  step's cost is the *maximum* over layers since they run concurrently.

Two propagation modes are supported.  ``pipelined`` is what the hardware
does: all layers start simultaneously, so at step ``n`` a layer consumes its
predecessor's output from step ``n-1``.  ``immediate`` propagates within the
same step, which is what software training stacks compute; for feed-forward
nets it is the pipelined output shifted by (layers-1) steps.  Recurrent
feedback always uses the layer's own previous-step output.

Idle timesteps still evaluate decay, threshold and reset — the skip is a
latency optimization, never a semantic change — and ``run`` is a pure
function of (spec, input): identical calls give identical reports.

Note on cycle-count monotonicity: adding input spikes never lowers the input
layer's own cost, and for the usual topologies (input layer dominating the
per-step maximum) total predicted cycles are monotone in input activity.
With inhibitory weights an extra input spike can silence a *larger*
downstream layer and lower the max; the guarantee is about the regime the
cycle model is calibrated for, not arbitrary adversarial nets.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .fxp import FxpFormat
from .neuron import NeuronSpec, NeuronState, reduce_model
from .fxp import FxpValue

PROPAGATION_MODES = ("pipelined", "immediate")


@dataclass(frozen=True)
class CycleModel:
    """Per-step cost constants of the generated control structure."""

    c_idle: int = 1
    c_act: int = 2
    c_net: int = 2


DEFAULT_CYCLES = CycleModel()


def _as_weight_matrix(w, rows: int, cols: int, fmt: FxpFormat, what: str) -> np.ndarray:
    arr = np.asarray(w, dtype=np.int64)
    if arr.shape != (rows, cols):
        raise ValueError(f"{what} must have shape ({rows}, {cols}), got {arr.shape}")
    if arr.size and (arr.min() < fmt.min_raw or arr.max() > fmt.max_raw):
        raise ValueError(
            f"{what} has entries outside the {fmt.total_bits}-bit range "
            f"[{fmt.min_raw}, {fmt.max_raw}]"
        )
    return arr


@dataclass(eq=False)
class LayerSpec:
    """One fully-connected layer: weights in their storage formats plus the
    neuron configuration shared by all neurons of the layer."""

    n_inputs: int
    n_neurons: int
    neuron: NeuronSpec
    w_ff: np.ndarray
    ff_fmt: FxpFormat
    w_fb: np.ndarray | None = None
    fb_fmt: FxpFormat | None = None

    def __post_init__(self) -> None:
        if self.n_inputs < 1 or self.n_neurons < 1:
            raise ValueError("layer dimensions must be >= 1")
        self.w_ff = _as_weight_matrix(
            self.w_ff, self.n_neurons, self.n_inputs, self.ff_fmt, "w_ff"
        )
        if (self.w_fb is None) != (self.fb_fmt is None):
            raise ValueError("w_fb and fb_fmt must be given together")
        if self.w_fb is not None:
            self.w_fb = _as_weight_matrix(
                self.w_fb, self.n_neurons, self.n_neurons, self.fb_fmt, "w_fb"
            )

    @property
    def recurrent(self) -> bool:
        return self.w_fb is not None


@dataclass(eq=False)
class NetworkSpec:
    name: str
    layers: list[LayerSpec]
    n_cycles: int
    propagation: str = "pipelined"
    scale_exp: int | None = None

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValueError("network needs at least one layer")
        if self.n_cycles < 1:
            raise ValueError("n_cycles must be >= 1")
        if self.propagation not in PROPAGATION_MODES:
            raise ValueError(
                f"propagation must be one of {PROPAGATION_MODES}, got {self.propagation!r}"
            )
        for k in range(1, len(self.layers)):
            a, b = self.layers[k - 1], self.layers[k]
            if b.n_inputs != a.n_neurons:
                raise ValueError(
                    f"layer {k + 1} expects {b.n_inputs} inputs but layer {k} "
                    f"has {a.n_neurons} neurons"
                )

    @property
    def n_inputs(self) -> int:
        return self.layers[0].n_inputs

    @property
    def n_outputs(self) -> int:
        return self.layers[-1].n_neurons

    def canonical(self) -> "NetworkSpec":
        """Reduce every layer's neuron model to its simplest equivalent."""
        layers = [replace(l, neuron=reduce_model(l.neuron)) for l in self.layers]
        return replace(self, layers=layers)


@dataclass(eq=False)
class SpikeStream:
    """A raster: shape (n_steps, n_channels), values 0/1."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.bits)
        if arr.ndim != 2:
            raise ValueError(f"raster must be 2-D (steps, channels), got ndim={arr.ndim}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("raster values must be 0 or 1")
        self.bits = arr.astype(np.uint8)

    @property
    def n_steps(self) -> int:
        return self.bits.shape[0]

    @property
    def n_channels(self) -> int:
        return self.bits.shape[1]

    @classmethod
    def zeros(cls, n_steps: int, n_channels: int) -> "SpikeStream":
        return cls(np.zeros((n_steps, n_channels), dtype=np.uint8))


@dataclass
class LayerActivity:
    """Fractions of timesteps with at least one spike per source."""

    ff_frac: float
    fb_frac: float | None
    any_frac: float

    def to_dict(self) -> dict:
        return {"ff_frac": self.ff_frac, "fb_frac": self.fb_frac, "any_frac": self.any_frac}


@dataclass
class RunReport:
    out_counts: np.ndarray
    predicted_cycles: int
    per_layer_activity: list[LayerActivity]
    no_activity: bool
    out_spikes: SpikeStream | None = None
    v_trace: list[np.ndarray] | None = None
    i_trace: list[np.ndarray | None] | None = None
    spike_trace: list[np.ndarray] | None = None

    def to_dict(self) -> dict:
        return {
            "out_counts": [int(c) for c in self.out_counts],
            "predicted_cycles": int(self.predicted_cycles),
            "predicted_class": classify(self.out_counts),
            "no_activity": self.no_activity,
            "per_layer_activity": [a.to_dict() for a in self.per_layer_activity],
        }


def classify(counts) -> int:
    """Class = index of the largest output counter; ties pick the lowest."""
    return int(np.argmax(np.asarray(counts)))


class _LayerRt:
    """Mutable per-layer simulation state plus precomputed constants."""

    def __init__(self, layer: LayerSpec):
        self.layer = layer
        n = layer.neuron
        fmt = n.neuron_fmt
        self.lo, self.hi = fmt.min_raw, fmt.max_raw
        # weights are requantized into the neuron format before accumulation
        self.w_ff = np.clip(layer.w_ff, self.lo, self.hi)
        self.w_ff_abs = np.abs(self.w_ff)
        if layer.recurrent:
            self.w_fb = np.clip(layer.w_fb, self.lo, self.hi)
            self.w_fb_abs = np.abs(self.w_fb)
        else:
            self.w_fb = None
            self.w_fb_abs = None
        self.model = n.model
        self.reset = n.reset
        self.ka = n.alpha_shift
        self.kb = n.beta_shift
        self.imm = n.immediate_current
        self.v_th = n.v_th
        self.v_reset = n.v_reset
        self.v = np.zeros(layer.n_neurons, dtype=np.int64)
        self.i = np.zeros(layer.n_neurons, dtype=np.int64) if n.model == "lif2" else None
        self.prev_out = np.zeros(layer.n_neurons, dtype=np.uint8)

    def accumulate(self, in_spikes: np.ndarray, fb_spikes: np.ndarray | None,
                   skip_idle: bool, wide: bool) -> np.ndarray:
        lo, hi = self.lo, self.hi
        n = self.layer.n_neurons
        if not skip_idle:
            # no OR gate: walk every address, spike-gated addend (zero adds
            # are identities, so this must equal the skipping path)
            acc = np.zeros(n, dtype=np.int64)
            gates = np.asarray(in_spikes, dtype=np.int64)
            for j in range(self.layer.n_inputs):
                np.clip(acc + self.w_ff[:, j] * gates[j], lo, hi, out=acc)
            if self.w_fb is not None:
                fb = np.asarray(fb_spikes, dtype=np.int64)
                for j in range(n):
                    np.clip(acc + self.w_fb[:, j] * fb[j], lo, hi, out=acc)
            return acc

        ff_cols = np.flatnonzero(in_spikes)
        fb_cols = (
            np.flatnonzero(fb_spikes) if self.w_fb is not None else np.empty(0, np.int64)
        )
        if ff_cols.size == 0 and fb_cols.size == 0:
            return np.zeros(n, dtype=np.int64)
        if wide:
            # sensitivity-analysis mode: exact sum, single clamp at the end
            acc = np.zeros(n, dtype=np.int64)
            if ff_cols.size:
                acc += self.w_ff[:, ff_cols].sum(axis=1)
            if fb_cols.size:
                acc += self.w_fb[:, fb_cols].sum(axis=1)
            return np.clip(acc, lo, hi)

        total = np.zeros(n, dtype=np.int64)
        bound = np.zeros(n, dtype=np.int64)
        if ff_cols.size:
            total += self.w_ff[:, ff_cols].sum(axis=1)
            bound += self.w_ff_abs[:, ff_cols].sum(axis=1)
        if fb_cols.size:
            total += self.w_fb[:, fb_cols].sum(axis=1)
            bound += self.w_fb_abs[:, fb_cols].sum(axis=1)
        # rows whose absolute prefix sums cannot leave the format take the
        # exact sum; the rest replay the sequential saturating chain
        safe = bound <= hi
        if safe.all():
            return total
        rows = np.flatnonzero(~safe)
        acc = np.zeros(rows.size, dtype=np.int64)
        if ff_cols.size:
            wsub = self.w_ff[np.ix_(rows, ff_cols)]
            for idx in range(ff_cols.size):
                np.clip(acc + wsub[:, idx], lo, hi, out=acc)
        if fb_cols.size:
            wsub = self.w_fb[np.ix_(rows, fb_cols)]
            for idx in range(fb_cols.size):
                np.clip(acc + wsub[:, idx], lo, hi, out=acc)
        total[rows] = acc
        return total

    def advance(self, win: np.ndarray) -> np.ndarray:
        """Integrate, fire, reset; returns the step's spike vector."""
        lo, hi = self.lo, self.hi
        if self.model == "if":
            v_new = np.clip(self.v + win, lo, hi)
        elif self.model == "lif1":
            v_new = np.clip(self.v - (self.v >> self.kb) + win, lo, hi)
        else:
            i_new = np.clip(self.i - (self.i >> self.ka) + win, lo, hi)
            drive = i_new if self.imm else self.i
            v_new = np.clip(self.v - (self.v >> self.kb) + drive, lo, hi)
            self.i = i_new
        spikes = v_new > self.v_th
        if self.reset == "static":
            self.v = np.where(spikes, np.int64(self.v_reset), v_new)
        else:
            self.v = np.where(spikes, np.clip(v_new - self.v_th, lo, hi), v_new)
        return spikes.astype(np.uint8)

    def consumed(self, any_ff: bool, any_fb: bool, skip_idle: bool, cm: CycleModel) -> int:
        if not skip_idle:
            return (
                self.layer.n_inputs
                + (self.layer.n_neurons if self.layer.recurrent else 0)
                + cm.c_act
            )
        if not any_ff and not any_fb:
            return cm.c_idle
        return (
            (self.layer.n_inputs if any_ff else 0)
            + (self.layer.n_neurons if any_fb else 0)
            + cm.c_act
        )


def run(
    spec: NetworkSpec,
    stream: SpikeStream,
    *,
    skip_idle: bool = True,
    wide_accumulator: bool = False,
    record_output: bool = False,
    record_states: bool = False,
    cycle_model: CycleModel = DEFAULT_CYCLES,
) -> RunReport:
    """Simulate one input raster through the network.

    The raster must supply exactly ``spec.n_cycles`` steps of
    ``spec.n_inputs`` channels.
    """
    spec = spec.canonical()
    if stream.n_channels != spec.n_inputs:
        raise ValueError(
            f"raster has {stream.n_channels} channels, network expects {spec.n_inputs}"
        )
    if stream.n_steps != spec.n_cycles:
        raise ValueError(
            f"raster has {stream.n_steps} steps, network expects n_cycles={spec.n_cycles}"
        )
    rts = [_LayerRt(l) for l in spec.layers]
    n_layers = len(rts)
    n_steps = spec.n_cycles
    pipelined = spec.propagation == "pipelined"

    counts = np.zeros(spec.n_outputs, dtype=np.int64)
    total_cycles = 0
    ff_hits = np.zeros(n_layers, dtype=np.int64)
    fb_hits = np.zeros(n_layers, dtype=np.int64)
    any_hits = np.zeros(n_layers, dtype=np.int64)
    out_rows = np.zeros((n_steps, spec.n_outputs), dtype=np.uint8) if record_output else None
    v_trace = [np.zeros((n_steps, l.n_neurons), np.int64) for l in spec.layers] if record_states else None
    i_trace = (
        [np.zeros((n_steps, l.n_neurons), np.int64) if l.neuron.model == "lif2" else None
         for l in spec.layers]
        if record_states
        else None
    )
    s_trace = [np.zeros((n_steps, l.n_neurons), np.uint8) for l in spec.layers] if record_states else None

    for n in range(n_steps):
        if pipelined:
            ins = [stream.bits[n]] + [rts[k].prev_out.copy() for k in range(n_layers - 1)]
        step_max = 0
        cur = stream.bits[n]
        for k, rt in enumerate(rts):
            x = ins[k] if pipelined else cur
            fb = rt.prev_out if rt.layer.recurrent else None
            any_ff = bool(x.any())
            any_fb = bool(fb.any()) if fb is not None else False
            win = rt.accumulate(x, fb, skip_idle, wide_accumulator)
            out = rt.advance(win)
            rt.prev_out = out
            if not pipelined:
                cur = out
            c = rt.consumed(any_ff, any_fb, skip_idle, cycle_model)
            step_max = c if c > step_max else step_max
            ff_hits[k] += any_ff
            fb_hits[k] += any_fb
            any_hits[k] += any_ff or any_fb
            if record_states:
                v_trace[k][n] = rt.v
                if i_trace[k] is not None:
                    i_trace[k][n] = rt.i
                s_trace[k][n] = out
        total_cycles += cycle_model.c_net + step_max
        counts += rts[-1].prev_out
        if record_output:
            out_rows[n] = rts[-1].prev_out

    activity = []
    for k, l in enumerate(spec.layers):
        activity.append(
            LayerActivity(
                ff_frac=float(ff_hits[k]) / n_steps,
                fb_frac=(float(fb_hits[k]) / n_steps) if l.recurrent else None,
                any_frac=float(any_hits[k]) / n_steps,
            )
        )
    return RunReport(
        out_counts=counts,
        predicted_cycles=int(total_cycles),
        per_layer_activity=activity,
        no_activity=not bool(counts.any()),
        out_spikes=SpikeStream(out_rows) if record_output else None,
        v_trace=v_trace,
        i_trace=i_trace,
        spike_trace=s_trace,
    )


def step_layer(
    layer: LayerSpec,
    states: list[NeuronState],
    in_spikes,
    fb_spikes=None,
    *,
    skip_idle: bool = True,
    wide_accumulator: bool = False,
    cycle_model: CycleModel = DEFAULT_CYCLES,
) -> tuple[list[NeuronState], np.ndarray, int]:
    """Advance a single layer by one timestep.

    Returns (new states, spike vector, consumed cycles).  This is the
    scalar-state view of exactly what ``run`` executes per layer-step.
    """
    layer = replace(layer, neuron=reduce_model(layer.neuron))
    if len(states) != layer.n_neurons:
        raise ValueError(f"expected {layer.n_neurons} states, got {len(states)}")
    x = np.asarray(in_spikes, dtype=np.uint8)
    if x.shape != (layer.n_inputs,):
        raise ValueError(f"in_spikes must have shape ({layer.n_inputs},)")
    if layer.recurrent:
        if fb_spikes is None:
            raise ValueError("recurrent layer requires fb_spikes")
        fb = np.asarray(fb_spikes, dtype=np.uint8)
        if fb.shape != (layer.n_neurons,):
            raise ValueError(f"fb_spikes must have shape ({layer.n_neurons},)")
    else:
        fb = None

    rt = _LayerRt(layer)
    rt.v = np.array([s.v_m.raw for s in states], dtype=np.int64)
    if rt.i is not None:
        if any(s.i_syn is None for s in states):
            raise ValueError("lif2 layer states require i_syn")
        rt.i = np.array([s.i_syn.raw for s in states], dtype=np.int64)
    win = rt.accumulate(x, fb, skip_idle, wide_accumulator)
    out = rt.advance(win)
    consumed = rt.consumed(bool(x.any()), bool(fb.any()) if fb is not None else False,
                           skip_idle, cycle_model)
    fmt = layer.neuron.neuron_fmt
    new_states = [
        NeuronState(
            v_m=FxpValue(int(rt.v[idx]), fmt),
            i_syn=FxpValue(int(rt.i[idx]), fmt) if rt.i is not None else None,
        )
        for idx in range(layer.n_neurons)
    ]
    return new_states, out, consumed


def measure_activity(spec: NetworkSpec, streams, **run_kwargs) -> list[LayerActivity]:
    """Mean per-layer activity fractions over a batch of rasters."""
    streams = list(streams)
    if not streams:
        raise ValueError("need at least one stream")
    acc_ff = np.zeros(len(spec.layers))
    acc_fb = np.zeros(len(spec.layers))
    acc_any = np.zeros(len(spec.layers))
    for s in streams:
        rep = run(spec, s, **run_kwargs)
        for k, a in enumerate(rep.per_layer_activity):
            acc_ff[k] += a.ff_frac
            acc_fb[k] += a.fb_frac or 0.0
            acc_any[k] += a.any_frac
    n = len(streams)
    return [
        LayerActivity(
            ff_frac=acc_ff[k] / n,
            fb_frac=(acc_fb[k] / n) if spec.layers[k].recurrent else None,
            any_frac=acc_any[k] / n,
        )
        for k in range(len(spec.layers))
    ]
