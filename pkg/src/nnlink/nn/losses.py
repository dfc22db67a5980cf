"""Cross-entropy losses and their gradients.

The plain versions take probabilities and clamp them to
``[EPS, 1 - EPS]``; the ``*_logits`` versions fuse the output activation
and are what the training loops use.
"""

from __future__ import annotations

import numpy as np

from ..errors import NotNormalized, ShapeMismatch

EPS = 1e-7


def _same_shape(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeMismatch(f"predictions {a.shape} and targets {b.shape} differ")
    return a, b


def bce_loss(p, bits) -> float:
    """Mean binary cross-entropy of probabilities ``p`` against 0/1 targets."""
    p, b = _same_shape(p, bits)
    pc = np.clip(p, EPS, 1.0 - EPS)
    return float(-np.mean(b * np.log(pc) + (1.0 - b) * np.log1p(-pc)))


def bce_grad(p, bits) -> np.ndarray:
    p, b = _same_shape(p, bits)
    pc = np.clip(p, EPS, 1.0 - EPS)
    g = (pc - b) / (pc * (1.0 - pc)) / p.size
    return np.where((p > EPS) & (p < 1.0 - EPS), g, 0.0)


def _check_simplex(p):
    sums = p.reshape(p.shape[0], -1).sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-6):
        raise NotNormalized("probability vectors must sum to 1 within 1e-6")


def cce_loss(p, one_hot) -> float:
    """Batch mean of ``-log p[target]`` for one-hot targets of shape ``(batch, M)``."""
    p, t = _same_shape(np.atleast_2d(p), np.atleast_2d(one_hot))
    _check_simplex(p)
    pc = np.clip(p, EPS, 1.0)
    return float(-np.sum(t * np.log(pc)) / p.shape[0])


def cce_grad(p, one_hot) -> np.ndarray:
    p, t = _same_shape(np.atleast_2d(p), np.atleast_2d(one_hot))
    pc = np.clip(p, EPS, 1.0)
    return np.where(p > EPS, -t / pc, 0.0) / p.shape[0]


def bce_with_logits(logits, bits):
    """Loss and gradient w.r.t. logits of ``bce_loss(sigmoid(logits), bits)``.

    Evaluated in log space, so it agrees with the clamped version wherever
    the clamp is inactive.
    """
    z, b = _same_shape(logits, bits)
    loss = np.mean(np.logaddexp(0.0, z) - b * z)
    p = 0.5 * (1.0 + np.tanh(0.5 * z))
    return float(loss), (p - b) / z.size


def cce_with_logits(logits, one_hot):
    """Loss and gradient w.r.t. logits of ``cce_loss(softmax(logits), one_hot)``."""
    z, t = _same_shape(np.atleast_2d(logits), np.atleast_2d(one_hot))
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_p = shifted - log_norm
    loss = -np.sum(t * log_p) / z.shape[0]
    return float(loss), (np.exp(log_p) - t) / z.shape[0]
