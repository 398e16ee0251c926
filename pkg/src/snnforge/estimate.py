"""Block-RAM and latency estimation, device fitting, capacity search.

Weight memories map onto 36 Kb block RAMs that are at most 72 bits wide and
512 entries deep at that width, so a memory of a given geometry costs
``ceil(width / 72) * ceil(depth / 512)`` blocks.  Each layer needs one
feed-forward memory (depth ``n_inputs``, width ``n_neurons * ff_bits``) and,
if recurrent, one feedback memory (depth ``n_neurons``, width
``n_neurons * fb_bits``): every neuron reads its weight slice of the
addressed word in parallel, which is what fixes the word width.

Latency prediction mirrors the simulator's cycle accounting in expectation:

    cycles = n_cycles * (c_net + max over layers of
             a_ff * n_inputs + a_fb * n_neurons
             + p_any * c_act + (1 - p_any) * c_idle)

with per-layer activity fractions (fraction of timesteps with at least one
feed-forward / feedback / any spike).  Fed the simulator's own measured
activity, the estimate matches its cycle count for topologies whose first
layer dominates the per-step maximum, the regime the constants are
calibrated for.

Device profiles (block-RAM and LUT budgets) come from a small built-in
catalog; a JSON file named by the ``SNNFORGE_DEVICES`` environment variable
(or passed explicitly) overrides or extends it.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

from .network import CycleModel, DEFAULT_CYCLES, LayerActivity, NetworkSpec

DEVICE_ENV_VAR = "SNNFORGE_DEVICES"


@dataclass(frozen=True)
class BramModel:
    capacity_bits: int = 36864
    max_width: int = 72
    base_depth: int = 512


DEFAULT_BRAM = BramModel()


def bram_count(depth: int, width: int, model: BramModel = DEFAULT_BRAM) -> int:
    """Blocks needed for one memory of the given geometry."""
    if depth < 0 or width < 0:
        raise ValueError("depth and width must be non-negative")
    if depth == 0 or width == 0:
        return 0
    return math.ceil(width / model.max_width) * math.ceil(depth / model.base_depth)


@dataclass(frozen=True)
class Device:
    name: str
    bram: int
    lut: int


BUILTIN_DEVICES = {
    "XC7Z020": Device("XC7Z020", bram=140, lut=53200),
    "XA7Z020": Device("XA7Z020", bram=140, lut=53200),
    "XCZU3EG": Device("XCZU3EG", bram=216, lut=70560),
}


def load_device_catalog(path: str | None = None) -> dict[str, Device]:
    """Built-in catalog, optionally extended by a JSON file
    ``{"NAME": {"bram": int, "lut": int}, ...}``."""
    catalog = dict(BUILTIN_DEVICES)
    p = path if path is not None else os.environ.get(DEVICE_ENV_VAR)
    if not p:
        return catalog
    try:
        data = json.loads(Path(p).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"device catalog {p}: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"device catalog {p}: top level must be an object")
    for name, entry in data.items():
        if not isinstance(entry, dict) or "bram" not in entry:
            raise ValueError(f"device catalog {p}: {name}: needs a 'bram' field")
        catalog[name] = Device(
            name=name, bram=int(entry["bram"]), lut=int(entry.get("lut", 0))
        )
    return catalog


def get_device(name: str, catalog: dict[str, Device] | None = None) -> Device:
    catalog = catalog if catalog is not None else load_device_catalog()
    if name in catalog:
        return catalog[name]
    folded = {k.casefold(): v for k, v in catalog.items()}
    dev = folded.get(name.casefold())
    if dev is None:
        known = ", ".join(sorted(catalog))
        raise ValueError(f"unknown device {name!r}; known: {known}")
    return dev


@dataclass
class LayerMemory:
    layer_index: int
    ff_depth: int
    ff_width: int
    ff_brams: int
    fb_depth: int | None = None
    fb_width: int | None = None
    fb_brams: int = 0

    def to_dict(self) -> dict:
        return {
            "layer": self.layer_index,
            "ff": {"depth": self.ff_depth, "width": self.ff_width, "brams": self.ff_brams},
            "fb": (
                {"depth": self.fb_depth, "width": self.fb_width, "brams": self.fb_brams}
                if self.fb_depth is not None
                else None
            ),
        }


@dataclass
class ResourceReport:
    layers: list[LayerMemory]
    total_brams: int
    total_weight_bits: int
    device: Device | None = None
    fits: bool | None = None

    def to_dict(self) -> dict:
        return {
            "layers": [l.to_dict() for l in self.layers],
            "total_brams": self.total_brams,
            "total_weight_bits": self.total_weight_bits,
            "device": self.device.name if self.device else None,
            "device_brams": self.device.bram if self.device else None,
            "fits": self.fits,
        }

    def to_text(self) -> str:
        lines = ["layer  memory      depth  width  brams"]
        for l in self.layers:
            lines.append(f"{l.layer_index:>5}  ff      {l.ff_depth:>9}  {l.ff_width:>5}  {l.ff_brams:>5}")
            if l.fb_depth is not None:
                lines.append(f"{l.layer_index:>5}  fb      {l.fb_depth:>9}  {l.fb_width:>5}  {l.fb_brams:>5}")
        lines.append(f"total brams: {self.total_brams}")
        if self.device is not None:
            verdict = "fits" if self.fits else "does NOT fit"
            lines.append(f"device {self.device.name}: {self.device.bram} brams -> {verdict}")
        return "\n".join(lines)


def estimate_network(spec: NetworkSpec, device: Device | None = None,
                     bram_model: BramModel = DEFAULT_BRAM) -> ResourceReport:
    """Per-layer weight-memory geometry and block-RAM budget."""
    layers = []
    total = 0
    total_bits = 0
    for k, l in enumerate(spec.layers, start=1):
        ff_w = l.n_neurons * l.ff_fmt.total_bits
        mem = LayerMemory(
            layer_index=k,
            ff_depth=l.n_inputs,
            ff_width=ff_w,
            ff_brams=bram_count(l.n_inputs, ff_w, bram_model),
        )
        total += mem.ff_brams
        total_bits += l.n_inputs * ff_w
        if l.recurrent:
            fb_w = l.n_neurons * l.fb_fmt.total_bits
            mem.fb_depth = l.n_neurons
            mem.fb_width = fb_w
            mem.fb_brams = bram_count(l.n_neurons, fb_w, bram_model)
            total += mem.fb_brams
            total_bits += l.n_neurons * fb_w
        layers.append(mem)
    fits = (total <= device.bram) if device is not None else None
    return ResourceReport(
        layers=layers, total_brams=total, total_weight_bits=total_bits,
        device=device, fits=fits,
    )


@dataclass
class LatencyEstimate:
    cycles: float
    seconds: float
    f_clk_hz: float

    def to_dict(self) -> dict:
        return {"cycles": self.cycles, "seconds": self.seconds, "f_clk_hz": self.f_clk_hz}


def _normalize_activity(spec: NetworkSpec, activity) -> list[LayerActivity]:
    if isinstance(activity, (int, float)):
        a = float(activity)
        if not 0.0 <= a <= 1.0:
            raise ValueError("activity fraction must lie in [0, 1]")
        out = []
        for l in spec.layers:
            fb = a if l.recurrent else None
            p_any = 1.0 - (1.0 - a) * (1.0 - (fb or 0.0))
            out.append(LayerActivity(ff_frac=a, fb_frac=fb, any_frac=p_any))
        return out
    acts = list(activity)
    if len(acts) != len(spec.layers):
        raise ValueError(f"need activity for {len(spec.layers)} layers, got {len(acts)}")
    return acts


def predict_latency(spec: NetworkSpec, activity=1.0, f_clk_hz: float = 100e6,
                    cycle_model: CycleModel = DEFAULT_CYCLES) -> LatencyEstimate:
    """Analytic inference latency from per-layer activity fractions."""
    if f_clk_hz <= 0:
        raise ValueError("f_clk_hz must be positive")
    acts = _normalize_activity(spec, activity)
    worst = 0.0
    for l, a in zip(spec.layers, acts):
        fb = a.fb_frac or 0.0
        e = a.ff_frac * l.n_inputs
        if l.recurrent:
            e += fb * l.n_neurons
        e += a.any_frac * cycle_model.c_act + (1.0 - a.any_frac) * cycle_model.c_idle
        worst = max(worst, e)
    cycles = spec.n_cycles * (cycle_model.c_net + worst)
    return LatencyEstimate(cycles=cycles, seconds=cycles / f_clk_hz, f_clk_hz=f_clk_hz)


def max_hidden_size(n_inputs: int, n_outputs: int, ff_bits: int, device: Device,
                    fb_bits: int | None = None, recurrent_hidden: bool = False,
                    bram_model: BramModel = DEFAULT_BRAM) -> int:
    """Largest hidden-layer size H of an in->H->out net that fits the device's
    block RAM (0 if even H=1 does not fit)."""
    if recurrent_hidden and fb_bits is None:
        raise ValueError("fb_bits required when the hidden layer is recurrent")

    def cost(h: int) -> int:
        c = bram_count(n_inputs, h * ff_bits, bram_model)
        c += bram_count(h, n_outputs * ff_bits, bram_model)
        if recurrent_hidden:
            c += bram_count(h, h * fb_bits, bram_model)
        return c

    if cost(1) > device.bram:
        return 0
    lo, hi = 1, 2
    while cost(hi) <= device.bram:
        lo, hi = hi, hi * 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if cost(mid) <= device.bram:
            lo = mid
        else:
            hi = mid
    return lo
