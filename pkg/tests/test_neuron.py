"""Neuron model kernels: integrate / fire semantics for the six variants.

Frozen expectations were computed by hand from the update rules before
implementing:

  lif1, k_beta=3, v=100, win=0:  v' = 100 - floor(100/8) = 88
  lif2, k_alpha=2, k_beta=3, i=40, v=0, win=0:
      i' = 40 - floor(40/4) = 30
      v' = (0 - 0) + 40 = 40        (membrane consumes the *previous* current)
"""

import numpy as np
import pytest

from snnforge.fxp import FxpFormat, FxpValue
from snnforge.neuron import (
    NeuronSpec,
    NeuronState,
    fire_and_reset,
    initial_state,
    integrate,
    reduce_model,
)

F8 = FxpFormat(8)


def _spec(model="lif1", reset="subtractive", bits=8, v_th=50, **kw):
    return NeuronSpec(
        model=model, reset=reset, neuron_fmt=FxpFormat(bits), v_th=v_th, **kw
    )


def _win(raw, bits=8):
    return FxpValue(raw, FxpFormat(bits))


def test_if_integrate_accumulates():
    spec = _spec(model="if", v_th=5)
    st = initial_state(spec)
    st = integrate(spec, st, _win(3))
    assert st.v_m.raw == 3
    st = integrate(spec, st, _win(3))
    assert st.v_m.raw == 6


def test_lif1_integrate_decays_then_adds():
    spec = _spec(model="lif1", beta_shift=3, v_th=120)
    st = NeuronState(v_m=FxpValue(100, F8))
    st = integrate(spec, st, _win(0))
    assert st.v_m.raw == 88


def test_lif2_membrane_uses_previous_current():
    spec = _spec(model="lif2", alpha_shift=2, beta_shift=3, v_th=120)
    st = NeuronState(v_m=FxpValue(0, F8), i_syn=FxpValue(40, F8))
    st = integrate(spec, st, _win(0))
    assert st.i_syn.raw == 30
    assert st.v_m.raw == 40


def test_lif2_immediate_current_toggle():
    spec = _spec(
        model="lif2", alpha_shift=2, beta_shift=3, v_th=120, immediate_current=True
    )
    st = NeuronState(v_m=FxpValue(0, F8), i_syn=FxpValue(40, F8))
    st = integrate(spec, st, _win(0))
    # with the toggle the membrane sees the already-updated current
    assert st.i_syn.raw == 30
    assert st.v_m.raw == 30


def test_fire_is_strictly_greater():
    spec = _spec(model="if", v_th=5)
    st, spike = fire_and_reset(spec, NeuronState(v_m=FxpValue(5, F8)))
    assert spike == 0
    assert st.v_m.raw == 5
    st, spike = fire_and_reset(spec, NeuronState(v_m=FxpValue(6, F8)))
    assert spike == 1
    assert st.v_m.raw == 1  # subtractive: 6 - 5


def test_static_reset():
    spec = _spec(model="if", reset="static", v_th=5, v_reset=0)
    st, spike = fire_and_reset(spec, NeuronState(v_m=FxpValue(9, F8)))
    assert spike == 1
    assert st.v_m.raw == 0
    spec2 = _spec(model="if", reset="static", v_th=5, v_reset=-2)
    st, spike = fire_and_reset(spec2, NeuronState(v_m=FxpValue(9, F8)))
    assert st.v_m.raw == -2


def test_reset_never_touches_current():
    spec = _spec(model="lif2", alpha_shift=2, beta_shift=3, v_th=5)
    st = NeuronState(v_m=FxpValue(100, F8), i_syn=FxpValue(77, F8))
    st, spike = fire_and_reset(spec, st)
    assert spike == 1
    assert st.i_syn.raw == 77
    assert st.v_m.raw == 95


def test_fire_idempotent_below_threshold():
    spec = _spec(model="lif1", beta_shift=3, v_th=50)
    st = NeuronState(v_m=FxpValue(50, F8))
    for _ in range(3):
        st, spike = fire_and_reset(spec, st)
        assert spike == 0
        assert st.v_m.raw == 50


def test_if_monotone_until_spike():
    spec = _spec(model="if", v_th=100)
    st = initial_state(spec)
    prev = st.v_m.raw
    rng = np.random.default_rng(0)
    for _ in range(50):
        st = integrate(spec, st, _win(int(rng.integers(0, 5))))
        st, spike = fire_and_reset(spec, st)
        assert spike == 0
        assert st.v_m.raw >= prev
        prev = st.v_m.raw


def test_zero_input_convergence():
    # high threshold so the trace never fires; membranes settle on the
    # decay fixed point (positive dead zone, exact zero from below)
    spec = _spec(model="lif1", beta_shift=2, v_th=127)
    st = NeuronState(v_m=FxpValue(90, F8))
    for _ in range(200):
        st = integrate(spec, st, _win(0))
        st, _ = fire_and_reset(spec, st)
    assert st.v_m.raw == 2**2 - 1

    st = NeuronState(v_m=FxpValue(-90, F8))
    for _ in range(200):
        st = integrate(spec, st, _win(0))
    assert st.v_m.raw == 0


def test_validation():
    with pytest.raises(ValueError):
        _spec(model="lif4")
    with pytest.raises(ValueError):
        _spec(model="if", reset="soft")
    with pytest.raises(ValueError):
        _spec(model="lif1", beta_shift=0)  # 0 is not a decay; omit instead
    with pytest.raises(ValueError):
        _spec(model="if", beta_shift=2)
    with pytest.raises(ValueError):
        _spec(model="lif1", beta_shift=2, alpha_shift=2)
    with pytest.raises(ValueError):
        _spec(model="if", v_th=300)  # not representable in 8 bits


def test_reduce_model():
    lif2 = _spec(model="lif2", alpha_shift=2, beta_shift=3)
    assert reduce_model(lif2) == lif2
    # synaptic persistence disabled -> first-order model, same leak
    dropped_alpha = _spec(model="lif2", beta_shift=3)
    red = reduce_model(dropped_alpha)
    assert red.model == "lif1" and red.beta_shift == 3
    # leak disabled as well -> plain integrate-and-fire
    dropped_both = _spec(model="lif2")
    assert reduce_model(dropped_both).model == "if"
    assert reduce_model(_spec(model="lif1")).model == "if"
    spec_if = _spec(model="if")
    assert reduce_model(spec_if) == spec_if
    # threshold and reset survive reduction
    assert reduce_model(dropped_alpha).v_th == dropped_alpha.v_th


def test_integrate_requires_canonical_spec():
    with pytest.raises(ValueError):
        integrate(_spec(model="lif2", beta_shift=3), NeuronState(FxpValue(0, F8), FxpValue(0, F8)), _win(0))


def _reference_trace(model, reset, ka, kb, v_th, v_reset, wins, immediate=False):
    """Plain big-int trace of the update rules, no saturation (wide headroom)."""
    v, i = 0, 0
    out_v, out_s = [], []
    for w in wins:
        if model == "lif2":
            i_new = (i - (i >> ka)) + w
            v = (v - (v >> kb)) + (i_new if immediate else i)
            i = i_new
        elif model == "lif1":
            v = (v - (v >> kb)) + w
        else:
            v = v + w
        s = 1 if v > v_th else 0
        if s:
            v = v_reset if reset == "static" else v - v_th
        out_v.append(v)
        out_s.append(s)
    return out_v, out_s


def test_random_traces_match_wide_reference():
    """2,000 random 50-step single-neuron traces at 24 bits, bit-for-bit."""
    rng = np.random.default_rng(1234)
    fmt = FxpFormat(24)
    models = ["if", "lif1", "lif2"]
    resets = ["static", "subtractive"]
    for _ in range(2000):
        model = models[rng.integers(0, 3)]
        reset = resets[rng.integers(0, 2)]
        ka = int(rng.integers(1, 5))
        kb = int(rng.integers(1, 5))
        v_th = int(rng.integers(0, 400))
        v_reset = int(rng.integers(-50, 51))
        imm = bool(rng.integers(0, 2))
        spec = NeuronSpec(
            model=model,
            reset=reset,
            neuron_fmt=fmt,
            v_th=v_th,
            v_reset=v_reset,
            alpha_shift=ka if model == "lif2" else None,
            beta_shift=kb if model != "if" else None,
            immediate_current=imm,
        )
        wins = [int(x) for x in rng.integers(-80, 81, size=50)]
        ref_v, ref_s = _reference_trace(model, reset, ka, kb, v_th, v_reset, wins, imm)
        st = initial_state(spec)
        for n, w in enumerate(wins):
            st = integrate(spec, st, FxpValue(w, fmt))
            st, s = fire_and_reset(spec, st)
            assert s == ref_s[n], (model, reset, n)
            assert st.v_m.raw == ref_v[n], (model, reset, n)
