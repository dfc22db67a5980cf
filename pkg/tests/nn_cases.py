"""Randomized small models covering every layer/activation/loss combination."""

import numpy as np

from nnlink.nn import Conv1d, Dense, NeuralModel, bce_loss, cce_loss, bce_with_logits, cce_with_logits


def _bias(rng, n):
    return rng.uniform(-0.5, 0.5, n)


def random_case(seed):
    """Return ``(model, x, loss_fn, grad_fn)`` for one randomized configuration.

    ``loss_fn()`` evaluates the scalar loss with the model's current
    parameters; ``grad_fn()`` returns the analytic parameter gradients.
    """
    rng = np.random.default_rng(seed)
    head = ["bce", "cce", "bce_logits", "cce_logits"][seed % 4]
    use_conv = seed % 3 != 0
    hidden_act = ["relu", "sigmoid", "identity"][seed % 3] if seed % 5 else "relu"
    batch = int(rng.integers(2, 5))
    n_out = int(rng.integers(2, 5))
    layers = []
    if use_conv:
        c_in, length = int(rng.integers(1, 3)), int(rng.integers(1, 5))
        kernel = int(rng.choice([1, 3, 5]))
        c_mid = int(rng.integers(1, 4))
        layers.append(Conv1d(c_in, c_mid, kernel, hidden_act, rng=rng, bias=_bias(rng, c_mid)))
        layers.append(Conv1d(c_mid, c_mid, kernel, "relu", rng=rng, bias=_bias(rng, c_mid)))
        input_shape = (c_in, length)
        flat = c_mid * length
    else:
        n_in = int(rng.integers(2, 6))
        input_shape = (n_in,)
        flat = n_in
    width = int(rng.integers(2, 6))
    layers.append(Dense(flat, width, hidden_act, rng=rng, bias=_bias(rng, width)))
    final_act = {"bce": "sigmoid", "cce": "softmax"}.get(head, "identity")
    layers.append(Dense(width, n_out, final_act, rng=rng, bias=_bias(rng, n_out)))
    model = NeuralModel(layers, input_shape)
    x = rng.standard_normal((batch,) + input_shape)
    if head.startswith("bce"):
        target = rng.integers(0, 2, (batch, n_out)).astype(float)
    else:
        target = np.eye(n_out)[rng.integers(0, n_out, batch)]

    def loss_fn():
        out = model.predict(x)
        return {
            "bce": lambda: bce_loss(out, target),
            "cce": lambda: cce_loss(out, target),
            "bce_logits": lambda: bce_with_logits(out, target)[0],
            "cce_logits": lambda: cce_with_logits(out, target)[0],
        }[head]()

    def grad_fn():
        from nnlink.nn import bce_grad, cce_grad

        out, cache = model.forward(x)
        seed_grad = {
            "bce": lambda: bce_grad(out, target),
            "cce": lambda: cce_grad(out, target),
            "bce_logits": lambda: bce_with_logits(out, target)[1],
            "cce_logits": lambda: cce_with_logits(out, target)[1],
        }[head]()
        return model.backward(cache, seed_grad)

    return model, head, loss_fn, grad_fn
