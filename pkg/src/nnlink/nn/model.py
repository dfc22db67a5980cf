"""Sequential container tying layers into one differentiable function."""

from __future__ import annotations

from dataclasses import dataclass
import hashlib

import numpy as np

from ..errors import ShapeMismatch, StaleCache
from .layers import Conv1d, Dense


@dataclass
class ForwardCache:
    model_id: int
    version: int
    layer_caches: list


class NeuralModel:
    """Ordered stack of `Dense` / `Conv1d` layers.

    ``input_shape`` is the per-sample shape the first layer sees, e.g.
    ``(2,)`` for a dense input or ``(1, 16)`` for a single-channel sequence.
    Flat ``(batch, prod(input_shape))`` inputs are reshaped automatically.
    """

    def __init__(self, layers, input_shape):
        self.layers = list(layers)
        self.input_shape = tuple(int(s) for s in input_shape)
        self._version = 0
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)
        self.output_shape = shape

    def __repr__(self):
        parts = [f"{l.kind}({l.n_in}->{l.n_out}, {l.activation})" for l in self.layers]
        return f"NeuralModel(input_shape={self.input_shape}, [{', '.join(parts)}])"

    @property
    def params(self) -> list:
        return [p for layer in self.layers for p in layer.params]

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    @property
    def version(self) -> int:
        return self._version

    def set_params(self, new_params) -> None:
        current = self.params
        if len(new_params) != len(current):
            raise ShapeMismatch(f"expected {len(current)} parameter arrays, got {len(new_params)}")
        for dst, src in zip(current, new_params):
            src = np.asarray(src, dtype=float)
            if src.shape != dst.shape:
                raise ShapeMismatch(f"parameter shape {src.shape} != {dst.shape}")
            dst[...] = src
        self._version += 1

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        for p in self.params:
            h.update(np.ascontiguousarray(p).tobytes())
        return h.hexdigest()

    def _reshape_input(self, x):
        x = np.asarray(x, dtype=float)
        n_feat = int(np.prod(self.input_shape))
        if x.shape[1:] == self.input_shape:
            return x
        if x.ndim == 1 and x.size == n_feat:
            x = x[None, :]
        if x.ndim >= 2 and int(np.prod(x.shape[1:])) == n_feat:
            return x.reshape((x.shape[0],) + self.input_shape)
        raise ShapeMismatch(f"input shape {x.shape} incompatible with {self.input_shape}")

    def forward(self, x, upto_logits=False):
        """Run the network on a batch.

        Returns ``(output, cache)``.  With ``upto_logits`` the last layer's
        activation is skipped and the pre-activation values are returned.
        """
        h = self._reshape_input(x)
        caches = []
        for i, layer in enumerate(self.layers):
            h, c = layer.forward(h)
            caches.append(c)
        if upto_logits:
            h = caches[-1][2]
        return h, ForwardCache(id(self), self._version, caches)

    def predict(self, x, upto_logits=False):
        return self.forward(x, upto_logits)[0]

    def backward(self, cache: ForwardCache, grad_out, wrt_logits=False, return_input_grad=False):
        """Exact gradients of a scalar loss given its gradient at the output.

        ``wrt_logits`` means ``grad_out`` is taken w.r.t. the last layer's
        pre-activation.  Gradients come back in `params` order.
        """
        if cache.model_id != id(self) or cache.version != self._version:
            raise StaleCache("cache was produced by a different model state")
        g = np.asarray(grad_out, dtype=float)
        grads_rev = []
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            skip = wrt_logits and i == len(self.layers) - 1
            g, layer_grads = layer.backward(cache.layer_caches[i], g, skip_activation=skip)
            grads_rev.append(layer_grads)
        grads = [p for layer_grads in reversed(grads_rev) for p in layer_grads]
        if return_input_grad:
            return grads, g
        return grads

    # persistence -----------------------------------------------------------

    def to_dict(self) -> dict:
        layers = []
        for layer in self.layers:
            doc = {"kind": layer.kind, "in": layer.n_in, "out": layer.n_out}
            if layer.kind == "conv1d":
                doc["kernel"] = layer.kernel
            doc["activation"] = layer.activation
            doc["weights"] = layer.weights.reshape(-1).tolist()
            doc["bias"] = layer.bias.tolist()
            layers.append(doc)
        return {"input_shape": list(self.input_shape), "layers": layers}

    @classmethod
    def from_dict(cls, doc: dict) -> "NeuralModel":
        layers = []
        for spec in doc["layers"]:
            kind = spec["kind"]
            w = np.asarray(spec["weights"], dtype=float)
            b = np.asarray(spec["bias"], dtype=float)
            if kind == "dense":
                shape = (spec["out"], spec["in"])
            elif kind == "conv1d":
                shape = (spec["out"], spec["in"], spec["kernel"])
            else:
                raise ValueError(f"unknown layer kind {kind!r}")
            if w.size != int(np.prod(shape)) or b.size != spec["out"]:
                raise ShapeMismatch(
                    f"{kind} layer declares {shape} but stores {w.size} weights / {b.size} biases"
                )
            if kind == "dense":
                layers.append(Dense(spec["in"], spec["out"], spec["activation"],
                                    weights=w.reshape(shape), bias=b))
            else:
                layers.append(Conv1d(spec["in"], spec["out"], spec["kernel"], spec["activation"],
                                     weights=w.reshape(shape), bias=b))
        return cls(layers, doc["input_shape"])
