"""Integrate-and-fire neuron kernels.

Six variants are supported: three model orders crossed with two reset
strategies.

========  =====================================================================
model     membrane update per timestep (all saturating, see :mod:`snnforge.fxp`)
========  =====================================================================
``if``    ``v' = v + win``
``lif1``  ``v' = decay(v, k_beta) + win``
``lif2``  ``i' = decay(i, k_alpha) + win``;  ``v' = decay(v, k_beta) + i``
========  =====================================================================

``win`` is the already-accumulated weighted input for the step (the network
module owns the spike-gated accumulation).  Note the second-order membrane
consumes the *previous* step's synaptic current; set ``immediate_current`` to
feed it the freshly updated one instead, which is what most software training
stacks compute.

A spike is emitted iff ``v' > v_th`` (strictly; ties do not fire).  Reset is
either ``static`` (jump to ``v_reset``) or ``subtractive`` (saturating
``v' - v_th``); the synaptic current is never reset.

Decay terms are disabled by *omitting* the shift, not by passing 0.
``reduce_model`` folds disabled terms away: a second-order spec without
``alpha_shift`` is a first-order model, a first-order spec without
``beta_shift`` is plain integrate-and-fire.  The runnable kernels require a
reduced ("canonical") spec so every declared decay is a real one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .fxp import FxpFormat, FxpValue, decay, sat_add, sat_sub

MODELS = ("if", "lif1", "lif2")
RESETS = ("static", "subtractive")


@dataclass(frozen=True)
class NeuronSpec:
    model: str
    reset: str
    neuron_fmt: FxpFormat
    v_th: int
    v_reset: int = 0
    alpha_shift: int | None = None
    beta_shift: int | None = None
    immediate_current: bool = False

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}, expected one of {MODELS}")
        if self.reset not in RESETS:
            raise ValueError(f"unknown reset {self.reset!r}, expected one of {RESETS}")
        for name, shift in (("alpha_shift", self.alpha_shift), ("beta_shift", self.beta_shift)):
            if shift is not None and not 1 <= shift <= 31:
                raise ValueError(
                    f"{name} must be in 1..31 (omit it to disable the term), got {shift}"
                )
        if self.model == "if" and (self.alpha_shift is not None or self.beta_shift is not None):
            raise ValueError("if model takes no decay shifts")
        if self.model == "lif1" and self.alpha_shift is not None:
            raise ValueError("lif1 has no synaptic current; alpha_shift not allowed")
        for name, raw in (("v_th", self.v_th), ("v_reset", self.v_reset)):
            if not self.neuron_fmt.contains(raw):
                raise ValueError(
                    f"{name}={raw} not representable in {self.neuron_fmt.total_bits} bits"
                )

    @property
    def is_canonical(self) -> bool:
        if self.model == "lif2":
            return self.alpha_shift is not None and self.beta_shift is not None
        if self.model == "lif1":
            return self.beta_shift is not None
        return True


def reduce_model(spec: NeuronSpec) -> NeuronSpec:
    """Return the simplest equivalent model (disabled decay terms dropped)."""
    out = spec
    if out.model == "lif2" and out.alpha_shift is None:
        out = replace(out, model="lif1")
    if out.model == "lif1" and out.beta_shift is None:
        out = replace(out, model="if")
    return out


@dataclass(frozen=True)
class NeuronState:
    v_m: FxpValue
    i_syn: FxpValue | None = None


def initial_state(spec: NeuronSpec) -> NeuronState:
    zero = FxpValue(0, spec.neuron_fmt)
    return NeuronState(v_m=zero, i_syn=zero if spec.model == "lif2" else None)


def _require_canonical(spec: NeuronSpec) -> None:
    if not spec.is_canonical:
        raise ValueError(
            "spec has disabled decay terms; apply reduce_model() before simulating"
        )


def integrate(spec: NeuronSpec, state: NeuronState, weighted_input: FxpValue) -> NeuronState:
    """Advance membrane (and synaptic current) by one timestep of input."""
    _require_canonical(spec)
    if weighted_input.fmt != spec.neuron_fmt:
        raise ValueError("weighted_input must be in the neuron format")
    if spec.model == "if":
        return NeuronState(v_m=sat_add(state.v_m, weighted_input))
    if spec.model == "lif1":
        return NeuronState(v_m=sat_add(decay(state.v_m, spec.beta_shift), weighted_input))
    # lif2
    if state.i_syn is None:
        raise ValueError("lif2 state requires i_syn")
    i_new = sat_add(decay(state.i_syn, spec.alpha_shift), weighted_input)
    drive = i_new if spec.immediate_current else state.i_syn
    v_new = sat_add(decay(state.v_m, spec.beta_shift), drive)
    return NeuronState(v_m=v_new, i_syn=i_new)


def fire_and_reset(spec: NeuronSpec, state: NeuronState) -> tuple[NeuronState, int]:
    """Threshold check and reset; returns (new state, spike as 0/1)."""
    _require_canonical(spec)
    th = FxpValue(spec.v_th, spec.neuron_fmt)
    if state.v_m.raw <= th.raw:
        return state, 0
    if spec.reset == "static":
        v_new = FxpValue(spec.v_reset, spec.neuron_fmt)
    else:
        v_new = sat_sub(state.v_m, th)
    return NeuronState(v_m=v_new, i_syn=state.i_syn), 1
