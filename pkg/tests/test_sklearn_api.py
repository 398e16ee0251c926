"""Estimator facade: parameter round-trips, prediction parity with run()."""

import numpy as np
import pytest

sklearn = pytest.importorskip("sklearn")
from sklearn.base import clone

from snnforge.codec import encode_batch, save_network
from snnforge.fxp import FxpFormat
from snnforge.network import LayerSpec, NetworkSpec, SpikeStream, run
from snnforge.neuron import NeuronSpec
from snnforge.quant import FloatLayer, FloatNetwork
from snnforge.sklearn_api import SpikingClassifier


def _net() -> NetworkSpec:
    nfmt = FxpFormat(10)
    wfmt = FxpFormat(4)
    rng = np.random.default_rng(3)
    return NetworkSpec(
        "sk",
        [
            LayerSpec(5, 6, NeuronSpec("lif1", "subtractive", nfmt, v_th=3,
                                       beta_shift=1),
                      rng.integers(-1, 5, size=(6, 5), dtype=np.int64), wfmt),
            LayerSpec(6, 3, NeuronSpec("if", "static", nfmt, v_th=2),
                      rng.integers(-1, 5, size=(3, 6), dtype=np.int64), wfmt),
        ],
        n_cycles=10,
    )


def _streams(n: int) -> list[SpikeStream]:
    rng = np.random.default_rng(17)
    return [SpikeStream(rng.random((10, 5)) < 0.4) for _ in range(n)]


def test_fit_predict_matches_run():
    net = _net()
    clf = SpikingClassifier(net).fit()
    X = _streams(8)
    pred = clf.predict(X)
    expect = [int(np.argmax(run(net, s).out_counts)) for s in X]
    assert list(pred) == expect
    assert list(clf.classes_) == [0, 1, 2]


def test_labels_map_through_classes():
    clf = SpikingClassifier(_net())
    clf.fit(y=[10, 20, 30])
    X = _streams(4)
    pred = clf.predict(X)
    assert set(pred) <= {10, 20, 30}


def test_score_is_accuracy():
    clf = SpikingClassifier(_net()).fit()
    X = _streams(6)
    y = clf.predict(X)
    assert clf.score(X, y) == 1.0


def test_decision_function_counts():
    net = _net()
    clf = SpikingClassifier(net).fit()
    X = _streams(3)
    counts = clf.decision_function(X)
    assert counts.shape == (3, 3)
    assert np.array_equal(counts[1], run(net, X[1]).out_counts)


def test_rate_input_uses_pinned_encoder():
    net = _net()
    clf = SpikingClassifier(net, encode_steps=10, encode_seed=5).fit()
    rates = np.random.default_rng(0).random((4, 5))
    pred = clf.predict(rates)
    streams = encode_batch(rates, 10, 5)
    expect = [int(np.argmax(run(net, s).out_counts)) for s in streams]
    assert list(pred) == expect


def test_3d_spike_array_input():
    net = _net()
    clf = SpikingClassifier(net).fit()
    arr = np.random.default_rng(2).random((4, 10, 5)) < 0.5
    pred = clf.predict(arr)
    assert pred.shape == (4,)


def test_config_path_and_float_quantization(tmp_path):
    rng = np.random.default_rng(8)
    fnet = FloatNetwork(
        "skf",
        [FloatLayer(n_inputs=5, n_neurons=3, model="lif1", reset="subtractive",
                    v_th=0.5, beta=0.5,
                    w_ff=rng.uniform(-1, 1, size=(3, 5)))],
        n_cycles=10,
    )
    cfg = tmp_path / "f.json"
    save_network(fnet, cfg)

    clf = SpikingClassifier(str(cfg), neuron_bits=8, ff_bits=4).fit()
    assert clf.network_.layers[0].ff_fmt.total_bits == 4
    assert clf.predict(_streams(2)).shape == (2,)

    with pytest.raises(ValueError, match="quantize"):
        SpikingClassifier(str(cfg)).fit()


def test_mode_override():
    clf = SpikingClassifier(_net(), mode="immediate").fit()
    assert clf.network_.propagation == "immediate"


def test_clone_and_params_roundtrip():
    clf = SpikingClassifier(_net(), neuron_bits=8, mode="immediate",
                            encode_steps=12)
    params = clf.get_params()
    assert params["encode_steps"] == 12 and params["mode"] == "immediate"
    dup = clone(clf)
    assert dup.get_params()["encode_steps"] == 12
    assert not hasattr(dup, "network_")


def test_errors():
    with pytest.raises(ValueError, match="required"):
        SpikingClassifier().fit()
    clf = SpikingClassifier(_net()).fit()
    with pytest.raises(ValueError, match="channels"):
        clf.predict([SpikeStream(np.ones((10, 4), dtype=bool))])
    with pytest.raises(ValueError, match="encode_steps"):
        clf.predict(np.zeros((2, 5)))
    with pytest.raises(ValueError, match="classes"):
        SpikingClassifier(_net()).fit(y=[0, 1, 2, 3])
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        SpikingClassifier(_net()).predict(_streams(1))
