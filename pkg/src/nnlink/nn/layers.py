"""Dense and 1-D convolution layers with analytic gradients."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeMismatch

ACTIVATIONS = ("identity", "relu", "sigmoid", "softmax")


def activate(z, kind):
    if kind == "identity":
        return z
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        # split by sign so exp never overflows
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if kind == "softmax":
        flat = z.reshape(z.shape[0], -1)
        e = np.exp(flat - flat.max(axis=1, keepdims=True))
        return (e / e.sum(axis=1, keepdims=True)).reshape(z.shape)
    raise ValueError(f"unknown activation {kind!r}")


def activation_backward(grad_a, z, a, kind):
    """Map a gradient w.r.t. activations back to pre-activations."""
    if kind == "identity":
        return grad_a
    if kind == "relu":
        return grad_a * (z > 0)
    if kind == "sigmoid":
        return grad_a * a * (1.0 - a)
    if kind == "softmax":
        g = grad_a.reshape(grad_a.shape[0], -1)
        s = a.reshape(a.shape[0], -1)
        return (s * (g - np.sum(g * s, axis=1, keepdims=True))).reshape(grad_a.shape)
    raise ValueError(f"unknown activation {kind!r}")


def _init_limit(activation, fan_in, fan_out):
    if activation == "relu":
        return np.sqrt(6.0 / fan_in)
    return np.sqrt(6.0 / (fan_in + fan_out))


class Dense:
    """Fully connected layer ``act(x @ W.T + b)``.

    Inputs with more than two axes are flattened per sample.
    ``weights`` has shape ``(n_out, n_in)``.
    """

    kind = "dense"

    def __init__(self, n_in, n_out, activation="identity", rng=None, weights=None, bias=None):
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.n_in = int(n_in)
        self.n_out = int(n_out)
        self.activation = activation
        if weights is None:
            rng = np.random.default_rng() if rng is None else rng
            lim = _init_limit(activation, self.n_in, self.n_out)
            weights = rng.uniform(-lim, lim, size=(self.n_out, self.n_in))
        if bias is None:
            bias = np.zeros(self.n_out)
        self.weights = np.array(weights, dtype=float)
        self.bias = np.array(bias, dtype=float)
        if self.weights.shape != (self.n_out, self.n_in) or self.bias.shape != (self.n_out,):
            raise ShapeMismatch(
                f"dense {self.n_in}->{self.n_out}: got weights {self.weights.shape}, bias {self.bias.shape}"
            )

    @property
    def params(self):
        return [self.weights, self.bias]

    def output_shape(self, input_shape):
        if int(np.prod(input_shape)) != self.n_in:
            raise ShapeMismatch(f"dense layer expects {self.n_in} inputs, got shape {input_shape}")
        return (self.n_out,)

    def forward(self, x):
        x_flat = x.reshape(x.shape[0], -1)
        if x_flat.shape[1] != self.n_in:
            raise ShapeMismatch(f"dense layer expects {self.n_in} inputs, got {x_flat.shape[1]}")
        z = x_flat @ self.weights.T + self.bias
        a = activate(z, self.activation)
        return a, (x.shape, x_flat, z, a)

    def backward(self, cache, grad_out, skip_activation=False):
        x_shape, x_flat, z, a = cache
        gz = grad_out if skip_activation else activation_backward(grad_out, z, a, self.activation)
        grads = [gz.T @ x_flat, gz.sum(axis=0)]
        return (gz @ self.weights).reshape(x_shape), grads


class Conv1d:
    """Stride-1 cross-correlation with zero padding that keeps the length.

    Input ``(batch, in_channels, length)``; ``weights`` has shape
    ``(out_channels, in_channels, kernel)`` with an odd kernel size.
    """

    kind = "conv1d"

    def __init__(self, in_channels, out_channels, kernel=3, activation="identity",
                 rng=None, weights=None, bias=None):
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        if kernel % 2 != 1:
            raise ValueError("kernel size must be odd for same-length padding")
        if out_channels < 1:
            raise ValueError("out_channels must be >= 1")
        self.n_in = int(in_channels)
        self.n_out = int(out_channels)
        self.kernel = int(kernel)
        self.activation = activation
        if weights is None:
            rng = np.random.default_rng() if rng is None else rng
            lim = _init_limit(activation, self.n_in * self.kernel, self.n_out * self.kernel)
            weights = rng.uniform(-lim, lim, size=(self.n_out, self.n_in, self.kernel))
        if bias is None:
            bias = np.zeros(self.n_out)
        self.weights = np.array(weights, dtype=float)
        self.bias = np.array(bias, dtype=float)
        if self.weights.shape != (self.n_out, self.n_in, self.kernel) or self.bias.shape != (self.n_out,):
            raise ShapeMismatch(
                f"conv1d {self.n_in}->{self.n_out} k={self.kernel}: "
                f"got weights {self.weights.shape}, bias {self.bias.shape}"
            )

    @property
    def params(self):
        return [self.weights, self.bias]

    def output_shape(self, input_shape):
        if len(input_shape) != 2 or input_shape[0] != self.n_in:
            raise ShapeMismatch(f"conv1d expects ({self.n_in}, length) input, got {input_shape}")
        return (self.n_out, input_shape[1])

    def forward(self, x):
        if x.ndim != 3 or x.shape[1] != self.n_in:
            raise ShapeMismatch(f"conv1d expects (batch, {self.n_in}, length), got {x.shape}")
        batch, _, length = x.shape
        pad = self.kernel // 2
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
        # im2col: one row per (sample, position), columns ordered (channel, tap)
        cols = sliding_window_view(xp, self.kernel, axis=2).transpose(0, 2, 1, 3)
        cols = cols.reshape(batch * length, self.n_in * self.kernel)
        z = (cols @ self.weights.reshape(self.n_out, -1).T + self.bias)
        z = z.reshape(batch, length, self.n_out).transpose(0, 2, 1)
        a = activate(z, self.activation)
        return a, (x.shape, cols, z, a)

    def backward(self, cache, grad_out, skip_activation=False):
        x_shape, cols, z, a = cache
        gz = grad_out if skip_activation else activation_backward(grad_out, z, a, self.activation)
        batch, _, length = x_shape
        gz2 = gz.transpose(0, 2, 1).reshape(batch * length, self.n_out)
        grads = [(gz2.T @ cols).reshape(self.weights.shape), gz2.sum(axis=0)]
        gcols = (gz2 @ self.weights.reshape(self.n_out, -1)).reshape(batch, length, self.n_in, self.kernel)
        pad = self.kernel // 2
        gxp = np.zeros((batch, self.n_in, length + 2 * pad))
        for t in range(self.kernel):
            gxp[:, :, t:t + length] += gcols[:, :, :, t].transpose(0, 2, 1)
        return gxp[:, :, pad:pad + length], grads
