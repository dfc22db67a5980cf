import numpy as np
import pytest

from nnlink.autoencoder import (
    AeTrainConfig,
    AETransceiver,
    Autoencoder,
    cnn_param_count,
    decode,
    e2e_step,
    encode,
    evaluate_ser,
    extract_constellation,
    infer_message,
    normalize_batch,
    normalize_batch_backward,
    one_hot,
    train_e2e,
)
from nnlink.channel import awgn, ebn0_to_n0, make_rng
from nnlink.errors import ConfigInvalid, IndexOutOfRange, StaleCalibration

from oracles import central_difference, max_relative_error


def test_one_hot_examples():
    assert one_hot(0, 4).tolist() == [1, 0, 0, 0]
    assert one_hot(3, 4).tolist() == [0, 0, 0, 1]
    assert one_hot([1, 2], 4).tolist() == [[0, 1, 0, 0], [0, 0, 1, 0]]
    for bad in (4, -1):
        with pytest.raises(IndexOutOfRange):
            one_hot(bad, 4)


@pytest.mark.parametrize("M", [4, 16, 64])
def test_cnn_parameter_count(M):
    ae = Autoencoder.build(M, "cnn")
    # conv(1->8,k3), conv(8->8,k3), dense(8M->2) / conv(2->8,k3), conv(8->8,k3), dense(8->M)
    enc = (1 * 8 * 3 + 8) + (8 * 8 * 3 + 8) + (8 * M * 2 + 2)
    dec = (2 * 8 * 3 + 8) + (8 * 8 * 3 + 8) + (8 * M + M)
    assert (ae.encoder.n_params, ae.decoder.n_params) == (enc, dec) == cnn_param_count(M)


def test_dnn_widths():
    ae = Autoencoder.build(64, "dnn")
    assert ae.encoder.layers[0].weights.shape == (128, 64)
    assert Autoencoder.build(4, "dnn").encoder.layers[0].weights.shape == (16, 4)
    with pytest.raises(ConfigInvalid):
        Autoencoder.build(4, "rnn")


def test_normalize_batch_power_and_gradient():
    rng = np.random.default_rng(0)
    h = rng.standard_normal((7, 2)) * 3.0
    z, power = normalize_batch(h)
    assert abs(np.mean(np.sum(z * z, axis=1)) - 1.0) < 1e-9
    w = rng.standard_normal((7, 2))
    analytic = normalize_batch_backward(w, h, power)
    numeric = central_difference(lambda: float(np.sum(w * normalize_batch(h)[0])), [h])
    assert max_relative_error([analytic], numeric) < 1e-6


@pytest.mark.parametrize("variant", ["cnn", "dnn"])
def test_codebook_unit_power_and_simplex(variant):
    ae = Autoencoder.build(16, variant, seed=2)
    ae.calibrate()
    cb = ae.codebook()
    assert abs(np.mean(np.abs(cb) ** 2) - 1.0) < 1e-9
    p = decode(ae, awgn(cb, 0.3, make_rng(0)))
    assert p.shape == (16, 16)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)
    assert decode(ae, 0.1j).shape == (16,)


def test_stale_calibration():
    ae = Autoencoder.build(4, "cnn")
    ae.calibrate()
    ae.encoder.set_params([p * 1.1 for p in ae.encoder.params])
    with pytest.raises(StaleCalibration):
        ae.codebook()
    ae.calibrate()
    assert ae.codebook().shape == (4,)


def test_encode_forms_agree():
    ae = Autoencoder.build(16, "cnn", seed=1)
    ae.calibrate()
    np.testing.assert_array_equal(encode(ae, [3, 5]), encode(ae, one_hot([3, 5], 16)))
    assert encode(ae, 7) == ae.codebook()[7]
    with pytest.raises(IndexOutOfRange):
        encode(ae, 16)


def test_zero_decoder_gives_uniform_posterior():
    ae = Autoencoder.build(16, "dnn")
    ae.decoder.set_params([np.zeros_like(p) for p in ae.decoder.params])
    p = decode(ae, np.array([0.3 + 2j, -1.0]))
    np.testing.assert_allclose(p, 1 / 16, atol=1e-15)
    assert infer_message(p).tolist() == [0, 0]


def test_infer_message_ties_pick_lowest_index():
    assert infer_message(np.array([0.2, 0.4, 0.4])) == 1
    assert infer_message(np.array([[0.5, 0.5], [0.3, 0.7]])).tolist() == [0, 1]


def test_bottleneck_gradient_identity():
    ae = Autoencoder.build(16, "cnn", seed=4)
    rng = make_rng(1)
    msgs = rng.integers(0, 16, 64)
    noise = awgn(np.zeros(64), 0.1, rng)
    *_, parts = e2e_step(ae, msgs, noise, return_parts=True)
    assert np.array_equal(parts["grad_decoder_input"], parts["grad_encoder_output"])
    np.testing.assert_array_equal(parts["y"],
                                  parts["z"] + np.stack([noise.real, noise.imag], axis=1))
    assert abs(np.mean(np.sum(parts["z"] ** 2, axis=1)) - 1.0) < 1e-9


@pytest.mark.parametrize("variant", ["cnn", "dnn"])
def test_end_to_end_gradients(variant):
    ae = Autoencoder.build(4, variant, seed=3)
    rng = np.random.default_rng(5)
    for p in ae.encoder.params + ae.decoder.params:
        if p.ndim == 1:
            p[:] = rng.uniform(0.05, 0.3, p.shape)  # keep relu pre-activations off zero
    msgs = rng.integers(0, 4, 12)
    noise = awgn(np.zeros(12), 0.2, make_rng(6))
    _, g_enc, g_dec = e2e_step(ae, msgs, noise)
    params = ae.encoder.params + ae.decoder.params
    # noisy decoder inputs can sit within 1e-4 of a relu kink, so use a narrower stencil
    numeric = central_difference(lambda: e2e_step(ae, msgs, noise)[0], params, h=1e-6)
    assert max_relative_error(g_enc + g_dec, numeric) < 1e-4


def test_encoder_receives_gradient():
    ae = Autoencoder.build(16, "cnn", seed=0)
    rng = make_rng(2)
    _, g_enc, _ = e2e_step(ae, rng.integers(0, 16, 256), awgn(np.zeros(256), 0.1, rng))
    assert any(np.any(g != 0) for g in g_enc)


def test_training_is_deterministic():
    cfg = AeTrainConfig(4, "dnn", batch_size=64, iterations=40, seed=3)
    (a, la), (b, lb) = train_e2e(cfg), train_e2e(cfg)
    np.testing.assert_array_equal(la, lb)
    np.testing.assert_array_equal(a.codebook(), b.codebook())


def test_config_validation():
    for bad in (dict(variant="x"), dict(batch_size=0), dict(learning_rate=-1.0),
                dict(final_lr_fraction=0.0)):
        with pytest.raises(ConfigInvalid):
            AeTrainConfig(4, **bad).validate()
    ae = Autoencoder.build(4)
    ae.calibrate()
    with pytest.raises(ConfigInvalid):
        evaluate_ser(ae, [0.0], 999, seed=0)


def test_qpsk_autoencoder_learns_a_square():
    ae, losses = train_e2e(AeTrainConfig(4, "cnn", iterations=2000, seed=0))
    assert losses[-100:].mean() < losses[:100].mean()
    lc = extract_constellation(ae)
    assert abs(lc.mean_power - 1.0) < 1e-9
    # QPSK at unit power has minimum distance sqrt(2)
    assert lc.min_distance() > 0.95 * np.sqrt(2)
    (rec,) = evaluate_ser(ae, [4.0], 200_000, seed=0)
    assert rec.train_snr_db == 10.0 and rec.variant == "cnn"
    # closed form at Eb/N0 = 4 dB is 2Q(sqrt(2*10^0.4)), about 0.0248
    assert rec.value < 1.25 * 0.0248


def test_transceiver_api():
    est = AETransceiver(order=4, variant="dnn", n_iter=300, batch_size=256, random_state=1)
    assert est.get_params()["variant"] == "dnn"
    est.fit()
    msgs = np.arange(4)
    x = est.transform(msgs)
    assert x.shape == (4,)
    np.testing.assert_array_equal(est.predict(x), msgs)
    assert est.predict_proba(x).shape == (4, 4)
    assert est.score(x, msgs) == 1.0
    assert abs(est.constellation_.mean_power - 1.0) < 1e-9
