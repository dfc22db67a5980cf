from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatch


@dataclass
class AdamState:
    """Moment accumulators and hyperparameters for bias-corrected Adam."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(params, grads, state: AdamState):
    """One Adam update.  Returns new parameter arrays; ``state`` advances in place."""
    if len(params) != len(grads):
        raise ShapeMismatch(f"{len(params)} parameters but {len(grads)} gradients")
    if not state.m:
        state.m = [np.zeros_like(p, dtype=float) for p in params]
        state.v = [np.zeros_like(p, dtype=float) for p in params]
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    out = []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if np.shape(g) != np.shape(p) or m.shape != np.shape(p):
            raise ShapeMismatch(f"gradient {np.shape(g)} does not match parameter {np.shape(p)}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        out.append(p - state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps))
    return out
