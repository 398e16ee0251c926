"""Quantizer: scale selection, decay rounding, width sweeps.

Frozen expectations (computed from the rules before implementing):

  round_decay(0.9)  -> round(-log2(0.1))  = round(3.3219) = 3
  round_decay(0.875)-> exact 3;  0.5 -> 1;  0.75 -> 2;  0.2 -> clamp up to 1
  scale with max|w_ff| = 0.8 (8-bit weights, limit 127), v_th = 0.1
  (8-bit neurons):  f_w = 7 (0.8*128 = 102.4 <= 127, *256 > 127),
  f_th = 10, joint min -> f = 7
  scale with max|w| = 0.5 (4-bit, limit 7), v_th = 1.0 (6-bit, limit 31):
  f_w = 3, f_th = 4 -> f = 3, so v_th -> 8 and the 0.5 weight -> 4
"""

import numpy as np
import pytest

from snnforge.quant import (
    FloatLayer,
    FloatNetwork,
    evaluate,
    quantize,
    realized_decay,
    round_decay,
    round_half_away,
    select_scale_exp,
    sweep,
)
from snnforge.tasks import separable_task


def _float_net(w, v_th=0.1, model="if", n_cycles=10, **kw):
    w = np.asarray(w, dtype=float)
    layer = FloatLayer(
        n_inputs=w.shape[1], n_neurons=w.shape[0], model=model,
        reset="subtractive", v_th=v_th, w_ff=w, **kw,
    )
    return FloatNetwork(name="t", layers=[layer], n_cycles=n_cycles)


def test_round_decay_examples():
    assert round_decay(0.875) == 3
    assert round_decay(0.9) == 3
    assert round_decay(0.5) == 1
    assert round_decay(0.75) == 2
    assert round_decay(0.2) == 1          # rounds to 0, clamped up
    assert round_decay(0.9999999, max_shift=6) == 6
    assert realized_decay(3) == 0.875
    with pytest.raises(ValueError):
        round_decay(0.0)
    with pytest.raises(ValueError):
        round_decay(1.0)


def test_round_half_away():
    got = round_half_away(np.array([0.5, 1.5, 2.5, -0.5, -2.5, 0.4, -0.4]))
    assert got.tolist() == [1, 2, 3, -1, -3, 0, 0]


def test_scale_selection_weight_bound():
    net = _float_net([[0.8]], v_th=0.1)
    assert select_scale_exp(net, neuron_bits=8, ff_bits=8, fb_bits=None) == 7


def test_scale_selection_threshold_bound():
    net = _float_net([[0.5]], v_th=1.0)
    spec = quantize(net, neuron_bits=6, ff_bits=4)
    assert spec.scale_exp == 3
    assert spec.layers[0].neuron.v_th == 8
    assert spec.layers[0].w_ff[0, 0] == 4


def test_scale_degenerate_all_zero():
    net = _float_net([[0.0, 0.0]], v_th=0.0)
    with pytest.warns(UserWarning, match="degenerates"):
        f = select_scale_exp(net, 8, 8, None)
    assert f == 0


def test_quantize_respects_formats_and_reduces_error():
    rng = np.random.default_rng(17)
    for _ in range(30):
        w = rng.normal(0, 0.4, size=(5, 9))
        net = _float_net(w, v_th=float(rng.uniform(0.2, 2.0)), model="lif1",
                         beta=float(rng.uniform(0.5, 0.99)))
        spec = quantize(net, neuron_bits=12, ff_bits=10)
        f = spec.scale_exp
        q = spec.layers[0].w_ff
        fmt = spec.layers[0].ff_fmt
        assert q.min() >= fmt.min_raw and q.max() <= fmt.max_raw
        # non-clipped entries are within half an lsb of the float value
        not_clipped = (q > fmt.min_raw) & (q < fmt.max_raw)
        err = np.abs(w - q / 2.0**f)
        assert (err[not_clipped] <= 2.0 ** -(f + 1) + 1e-12).all()


def test_quantize_decay_shifts():
    net = _float_net([[0.3]], v_th=1.0, model="lif2", alpha=0.9, beta=0.875)
    spec = quantize(net, neuron_bits=8, ff_bits=8)
    assert spec.layers[0].neuron.alpha_shift == 3
    assert spec.layers[0].neuron.beta_shift == 3


def test_quantize_recurrent_needs_fb_bits():
    w = [[0.1]]
    layer = FloatLayer(n_inputs=1, n_neurons=1, model="if", reset="static",
                       v_th=1.0, w_ff=np.array(w), w_fb=np.array([[0.2]]))
    net = FloatNetwork(name="r", layers=[layer], n_cycles=5)
    with pytest.raises(ValueError, match="fb_bits"):
        quantize(net, neuron_bits=8, ff_bits=8)
    spec = quantize(net, neuron_bits=8, ff_bits=8, fb_bits=6)
    assert spec.layers[0].recurrent


def test_float_layer_validation():
    with pytest.raises(ValueError, match="alpha"):
        FloatLayer(n_inputs=1, n_neurons=1, model="lif2", reset="static",
                   v_th=1.0, beta=0.5, w_ff=np.array([[0.1]]))
    with pytest.raises(ValueError, match="beta"):
        FloatLayer(n_inputs=1, n_neurons=1, model="if", reset="static",
                   v_th=1.0, beta=0.5, w_ff=np.array([[0.1]]))
    with pytest.raises(ValueError, match="strictly"):
        FloatLayer(n_inputs=1, n_neurons=1, model="lif1", reset="static",
                   v_th=1.0, beta=1.0, w_ff=np.array([[0.1]]))
    with pytest.raises(ValueError, match="finite"):
        FloatLayer(n_inputs=1, n_neurons=1, model="if", reset="static",
                   v_th=float("nan"), w_ff=np.array([[0.1]]))
    with pytest.raises(ValueError, match="w_ff"):
        FloatLayer(n_inputs=2, n_neurons=1, model="if", reset="static",
                   v_th=1.0, w_ff=np.array([[0.1]]))


def test_task_accuracy_at_4bit_weights_6bit_neurons():
    net, eval_set = separable_task()
    spec = quantize(net, neuron_bits=6, ff_bits=4)
    assert evaluate(spec, eval_set) >= 0.95


def test_sweep_reference_row_and_determinism():
    net, eval_set = separable_task(n_samples=40)
    res1 = sweep(net, eval_set, dimension="ff", widths=[16, 8, 4, 2])
    res2 = sweep(net, eval_set, dimension="ff", widths=[16, 8, 4, 2])
    assert res1.to_csv() == res2.to_csv()
    top = [r for r in res1.rows if r.swept_bits == 16][0]
    assert top.accuracy == res1.reference.accuracy
    assert top.scale_exp == res1.reference.scale_exp
    lines = res1.to_csv().splitlines()
    assert lines[0] == "dimension,bits,accuracy"
    assert lines[1].startswith("ff,16,")
    assert len(lines) == 5


def test_sweep_monotone_on_task():
    net, eval_set = separable_task(n_samples=40)
    res = sweep(net, eval_set, dimension="ff", widths=[8, 2])
    acc = {r.swept_bits: r.accuracy for r in res.rows}
    assert acc[2] <= acc[8] + 0.02


def test_sweep_validation():
    net, eval_set = separable_task(n_samples=8)
    with pytest.raises(ValueError, match="dimension"):
        sweep(net, eval_set, dimension="bias", widths=[8])
    with pytest.raises(ValueError, match="recurrent"):
        sweep(net, eval_set, dimension="fb", widths=[8])
    with pytest.raises(ValueError, match="1..32"):
        sweep(net, eval_set, dimension="ff", widths=[33])


def test_evaluate_empty_set():
    net, eval_set = separable_task(n_samples=4)
    spec = quantize(net, 8, 8)
    with pytest.raises(ValueError):
        evaluate(spec, [])
    acc = evaluate(spec, eval_set)
    assert 0.0 <= acc <= 1.0
