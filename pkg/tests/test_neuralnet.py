import numpy as np
import pytest

from nnlink.errors import NotNormalized, ShapeMismatch, StaleCache
from nnlink.nn import (
    AdamState,
    Conv1d,
    Dense,
    NeuralModel,
    activate,
    adam_step,
    bce_loss,
    bce_with_logits,
    cce_loss,
    cce_with_logits,
)

from nn_cases import random_case
from oracles import central_difference, max_relative_error


def test_identity_dense_passthrough():
    m = NeuralModel([Dense(3, 3, "identity", weights=np.eye(3), bias=np.zeros(3))], (3,))
    x = np.array([[1.0, -2.0, 0.5]])
    np.testing.assert_array_equal(m.predict(x), x)


def test_relu_clamps():
    m = NeuralModel([Dense(1, 1, "relu", weights=[[2.0]], bias=[1.0])], (1,))
    assert m.predict([[-3.0]]).tolist() == [[0.0]]


def test_delta_kernel_conv_is_identity():
    w = np.array([[[0.0, 1.0, 0.0]]])
    m = NeuralModel([Conv1d(1, 1, 3, "identity", weights=w, bias=[0.0])], (1, 7))
    x = np.random.default_rng(0).standard_normal((4, 1, 7))
    np.testing.assert_array_equal(m.predict(x), x)


def test_conv_matches_direct_sum():
    rng = np.random.default_rng(1)
    layer = Conv1d(2, 3, 3, "identity", rng=rng, bias=rng.standard_normal(3))
    x = rng.standard_normal((2, 2, 5))
    out, _ = layer.forward(x)
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1)))
    for b in range(2):
        for o in range(3):
            for t in range(5):
                want = np.sum(layer.weights[o] * xp[b, :, t:t + 3]) + layer.bias[o]
                assert out[b, o, t] == pytest.approx(want, abs=1e-12)


def test_shape_mismatch():
    m = NeuralModel([Dense(2, 3)], (2,))
    with pytest.raises(ShapeMismatch):
        m.predict(np.zeros((4, 5)))
    with pytest.raises(ShapeMismatch):
        NeuralModel([Dense(2, 3), Dense(4, 1)], (2,))


def test_bce_examples():
    assert bce_loss([0.5, 0.5, 0.5], [1, 0, 1]) == pytest.approx(np.log(2), abs=1e-12)
    assert bce_loss([1.0, 0.0], [1, 0]) == pytest.approx(0.0, abs=1e-6)
    assert bce_loss([0.9, 0.2], [1, 0]) == pytest.approx(-(np.log(0.9) + np.log(0.8)) / 2, abs=1e-12)
    assert bce_loss([0.9, 0.2], [1, 0]) == pytest.approx(0.164252, abs=1e-6)
    with pytest.raises(ShapeMismatch):
        bce_loss([0.5], [1, 0])


def test_cce_examples():
    assert cce_loss([[0, 1.0, 0]], [[0, 1, 0]]) == pytest.approx(0.0, abs=1e-12)
    assert cce_loss([[0.25] * 4], [[0, 0, 1, 0]]) == pytest.approx(np.log(4), abs=1e-12)
    assert cce_loss([[0.7, 0.2, 0.1]], [[0, 1, 0]]) == pytest.approx(1.609438, abs=1e-6)
    with pytest.raises(NotNormalized):
        cce_loss([[0.7, 0.7]], [[1, 0]])


def test_fused_losses_agree_with_plain():
    rng = np.random.default_rng(5)
    z = rng.standard_normal((6, 4))
    b = rng.integers(0, 2, (6, 4))
    assert bce_with_logits(z, b)[0] == pytest.approx(bce_loss(activate(z, "sigmoid"), b), rel=1e-12)
    t = np.eye(4)[rng.integers(0, 4, 6)]
    assert cce_with_logits(z, t)[0] == pytest.approx(cce_loss(activate(z, "softmax"), t), rel=1e-12)


def test_softmax_simplex():
    z = np.random.default_rng(2).normal(0, 30, (100, 16))
    p = activate(z, "softmax")
    assert np.all(p > 0)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)


def test_cce_tends_to_zero_with_confidence():
    losses = [cce_with_logits(np.array([[s, 0.0, 0.0]]), np.array([[1, 0, 0]]))[0] for s in (1, 5, 20)]
    assert losses[0] > losses[1] > losses[2] > 0
    assert losses[2] < 1e-8


@pytest.mark.parametrize("seed", range(24))
def test_gradients_match_finite_differences(seed):
    model, head, loss_fn, grad_fn = random_case(seed)
    analytic = grad_fn()
    numeric = central_difference(loss_fn, model.params, h=1e-4)
    assert max_relative_error(analytic, numeric) < 1e-4, head


def test_zero_seed_gives_zero_gradients():
    model, _, _, _ = random_case(3)
    x = np.random.default_rng(0).standard_normal((2,) + model.input_shape)
    out, cache = model.forward(x)
    for g in model.backward(cache, np.zeros_like(out)):
        assert not np.any(g)


def test_dense_outer_product_rule():
    rng = np.random.default_rng(4)
    m = NeuralModel([Dense(3, 2, "identity", rng=rng)], (3,))
    x = rng.standard_normal((1, 3))
    g_out = rng.standard_normal((1, 2))
    _, cache = m.forward(x)
    dW, db = m.backward(cache, g_out)
    np.testing.assert_allclose(dW, np.outer(g_out[0], x[0]), atol=1e-15)
    np.testing.assert_allclose(db, g_out[0], atol=1e-15)


def test_stale_cache():
    m = NeuralModel([Dense(2, 2, rng=np.random.default_rng(0))], (2,))
    out, cache = m.forward(np.ones((1, 2)))
    m.set_params([p + 1 for p in m.params])
    with pytest.raises(StaleCache):
        m.backward(cache, np.ones_like(out))


def test_adam_first_step_is_signed_learning_rate():
    p = [np.array([1.0, -2.0, 3.0])]
    g = [np.array([0.5, -4.0, 1e-3])]
    state = AdamState(lr=0.01)
    new = adam_step(p, g, state)
    expected = p[0] - 0.01 * g[0] / (np.abs(g[0]) + 1e-8)
    np.testing.assert_allclose(new[0], expected, rtol=1e-12)
    np.testing.assert_allclose(np.abs(new[0] - p[0]), 0.01, rtol=1e-4)


def test_adam_zero_gradient_keeps_params():
    p = [np.array([1.0, 2.0])]
    state = AdamState()
    for _ in range(3):
        p = adam_step(p, [np.zeros(2)], state)
    np.testing.assert_array_equal(p[0], [1.0, 2.0])
    assert state.step == 3


def test_adam_constant_gradient_updates_do_not_grow():
    p0 = [np.array([0.0])]
    state = AdamState(lr=0.1)
    p1 = adam_step(p0, [np.array([2.0])], state)
    p2 = adam_step(p1, [np.array([2.0])], state)
    # with constant g both bias-corrected ratios equal g / (|g| + eps)
    assert abs(p2[0][0] - p1[0][0]) <= abs(p1[0][0] - p0[0][0]) + 1e-12


def test_adam_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        adam_step([np.zeros(2)], [np.zeros(3)], AdamState())


def test_round_trip_dict():
    rng = np.random.default_rng(9)
    m = NeuralModel([Conv1d(1, 2, 3, "relu", rng=rng), Dense(8, 3, "softmax", rng=rng)], (1, 4))
    m2 = NeuralModel.from_dict(m.to_dict())
    for a, b in zip(m.params, m2.params):
        np.testing.assert_array_equal(a, b)
    doc = m.to_dict()
    doc["layers"][1]["weights"] = doc["layers"][1]["weights"][:-1]
    with pytest.raises(ShapeMismatch):
        NeuralModel.from_dict(doc)


def test_deterministic_training_trajectory():
    def run():
        rng = np.random.default_rng(0)
        m = NeuralModel([Dense(2, 4, "relu", rng=rng), Dense(4, 1, rng=rng)], (2,))
        state = AdamState()
        data = np.random.default_rng(1)
        for _ in range(20):
            x = data.standard_normal((8, 2))
            out, cache = m.forward(x)
            _, g = bce_with_logits(out, (x[:, :1] > 0).astype(float))
            m.set_params(adam_step(m.params, m.backward(cache, g), state))
        return m.params

    for a, b in zip(run(), run()):
        np.testing.assert_array_equal(a, b)
