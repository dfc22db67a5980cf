"""Small numpy neural-network engine: layers, losses, exact backprop and Adam."""

from .layers import ACTIVATIONS, Conv1d, Dense, activate
from .losses import bce_grad, bce_loss, bce_with_logits, cce_grad, cce_loss, cce_with_logits
from .model import ForwardCache, NeuralModel
from .optim import AdamState, adam_step

__all__ = [
    "ACTIVATIONS",
    "AdamState",
    "Conv1d",
    "Dense",
    "ForwardCache",
    "NeuralModel",
    "activate",
    "adam_step",
    "bce_grad",
    "bce_loss",
    "bce_with_logits",
    "cce_grad",
    "cce_loss",
    "cce_with_logits",
]
