import numpy as np
import pytest
from scipy.special import expit

from nnlink.app_demapper import APPDemapper, hard_decide
from nnlink.channel import awgn, ebn0_to_n0, make_rng
from nnlink.errors import ConfigInvalid, ShapeMismatch
from nnlink.harness.sweep import app_sweep
from nnlink.modem import build_constellation, modulate
from nnlink.nn import Dense, NeuralModel
from nnlink.nn_demapper import (
    DemapperModel,
    DemapperTrainConfig,
    NeuralDemapper,
    build_demapper,
    demap_nn,
    evaluate_ber,
    train_demapper,
)


def sign_demapper():
    """Hand-built QPSK network whose outputs are (Re y, Im y)."""
    w1 = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    w3 = np.array([[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, -1.0]])
    net = NeuralModel(
        [
            Dense(2, 4, "relu", weights=w1, bias=np.zeros(4)),
            Dense(4, 4, "relu", weights=np.eye(4), bias=np.zeros(4)),
            Dense(4, 2, "identity", weights=w3, bias=np.zeros(2)),
        ],
        input_shape=(2,),
    )
    return DemapperModel(net, 4)


def test_output_shapes():
    model = build_demapper(64, widths=(16, 8), seed=1)
    assert demap_nn(model, 0.3 + 0.1j).shape == (6,)
    assert demap_nn(model, np.zeros(5, complex)).shape == (5, 6)
    assert model.network.n_params == (2 * 16 + 16) + (16 * 8 + 8) + (8 * 6 + 6)


def test_zero_weights_give_zero_llrs():
    model = build_demapper(16, seed=0)
    model.network.set_params([np.zeros_like(p) for p in model.network.params])
    y = np.random.default_rng(0).standard_normal(10) * (1 + 1j)
    assert not np.any(demap_nn(model, y))


def test_logit_threshold_equals_probability_threshold():
    model = build_demapper(16, seed=3)
    y = np.random.default_rng(1).standard_normal(2000) + 1j * np.random.default_rng(2).standard_normal(2000)
    z = demap_nn(model, y)
    np.testing.assert_array_equal(hard_decide(z), (expit(z) > 0.5).astype(np.int8))


def test_hand_built_network_matches_app_exactly():
    # same seed means same bits and noise; identical decisions give identical counts
    model = sign_demapper()
    grid = [0.0, 3.0, 6.0]
    nn = evaluate_ber(model, grid, 200_000, seed=5, batch=30_000)
    app = app_sweep(4, grid, 200_000, seed=5, batch=30_000)
    assert [r.errors for r in nn] == [r.errors for r in app]
    assert all(r.errors > 0 for r in app)


def test_deterministic_training():
    c = build_constellation(4)
    cfg = DemapperTrainConfig(4.0, batch_size=64, iterations=30, seed=9)
    (a, la), (b, lb) = train_demapper(cfg, c), train_demapper(cfg, c)
    np.testing.assert_array_equal(la, lb)
    for p, q in zip(a.network.params, b.network.params):
        np.testing.assert_array_equal(p, q)


def test_config_validation():
    for bad in (dict(batch_size=0), dict(iterations=0), dict(learning_rate=0.0)):
        with pytest.raises(ConfigInvalid):
            DemapperTrainConfig(4.0, **bad).validate()
    with pytest.raises(ConfigInvalid):
        DemapperTrainConfig(float("nan")).validate()
    with pytest.raises(ConfigInvalid):
        evaluate_ber(build_demapper(16), [0.0], 10, seed=0)


def test_training_reduces_loss():
    cfg = DemapperTrainConfig(8.0, batch_size=256, iterations=400, learning_rate=1e-2, seed=0)
    _, losses = train_demapper(cfg, build_constellation(16))
    assert losses[-50:].mean() < 0.5 * losses[:50].mean()


def test_trained_qpsk_close_to_app():
    cfg = DemapperTrainConfig(4.0, batch_size=512, iterations=1500, learning_rate=1e-2, seed=2)
    model, _ = train_demapper(cfg, build_constellation(4))
    nn = evaluate_ber(model, [2.0, 4.0], 400_000, seed=1)
    app = app_sweep(4, [2.0, 4.0], 400_000, seed=1)
    for a, n in zip(app, nn):
        assert n.value <= 1.25 * a.value


def test_estimator_api_simulated():
    est = NeuralDemapper(order=4, hidden=(8, 8), n_iter=200, batch_size=128,
                         learning_rate=1e-2, random_state=0)
    params = est.get_params()
    assert params["order"] == 4 and params["hidden"] == (8, 8)
    est.fit()
    assert est.n_iter_ == 200 and est.model_.train_ebn0_db == 4.0
    pts = est.constellation_.points
    assert est.transform(pts).shape == (4, 2)
    np.testing.assert_array_equal(est.predict(pts), est.constellation_.labels)
    assert est.score(pts, est.constellation_.labels) == 1.0
    p = est.predict_proba(pts)
    assert np.all((p > 0) & (p < 1))


def test_estimator_fit_on_dataset():
    c = build_constellation(4)
    rng = make_rng(4)
    bits = rng.integers(0, 2, (3000, 2))
    y = awgn(modulate(bits.reshape(-1), c), ebn0_to_n0(6.0, 2), rng)
    est = NeuralDemapper(order=4, hidden=(8, 8), n_iter=300, batch_size=256,
                         learning_rate=1e-2).fit(y, bits)
    assert est.model_.train_ebn0_db is None
    ref = APPDemapper(order=4, ebn0_db=6.0).fit()
    agree = np.mean(est.predict(y) == ref.predict(y))
    assert agree > 0.98
    with pytest.raises(ShapeMismatch):
        NeuralDemapper(order=4, n_iter=1).fit(y, bits[:, :1])
