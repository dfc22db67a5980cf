"""JSON model bundles for trained demappers and autoencoders.

Weights are stored as JSON numbers.  Python writes the shortest repr that
reads back to the same double, so a save/load cycle is value-identical.
"""

from __future__ import annotations

import json
import os

from ..autoencoder import Autoencoder
from ..errors import FormatVersionMismatch, ModelLoadError, ShapeMismatch
from ..nn import NeuralModel
from ..nn_demapper import DemapperModel

FORMAT_VERSION = 1


def model_to_dict(model) -> dict:
    if isinstance(model, DemapperModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "demapper",
            "order": model.order,
            "train_ebn0_db": model.train_ebn0_db,
            "network": model.network.to_dict(),
        }
    if isinstance(model, Autoencoder):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "autoencoder",
            "order": model.order,
            "variant": model.variant,
            "train_ebn0_db": model.train_ebn0_db,
            "components": [
                {"component": "enc", "network": model.encoder.to_dict()},
                {"component": "dec", "network": model.decoder.to_dict()},
            ],
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(doc: dict):
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"bundle format_version {version!r}, this build reads {FORMAT_VERSION}")
    try:
        kind = doc["kind"]
        if kind == "demapper":
            net = NeuralModel.from_dict(doc["network"])
            return DemapperModel(net, int(doc["order"]), doc.get("train_ebn0_db"))
        if kind == "autoencoder":
            parts = {c["component"]: NeuralModel.from_dict(c["network"])
                     for c in doc["components"]}
            if set(parts) != {"enc", "dec"}:
                raise ModelLoadError("autoencoder bundle needs one 'enc' and one 'dec' component")
            ae = Autoencoder(parts["enc"], parts["dec"], int(doc["order"]), doc["variant"],
                             doc.get("train_ebn0_db"))
            ae.calibrate()
            return ae
    except ShapeMismatch:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelLoadError(f"malformed model bundle: {exc}") from exc
    raise ModelLoadError(f"unknown model kind {kind!r}")


def save_model(path, model) -> None:
    doc = model_to_dict(model)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
    os.replace(tmp, path)


def load_model(path):
    """Read a bundle written by `save_model`.

    Raises `ModelLoadError` for unreadable or malformed files,
    `FormatVersionMismatch` for a foreign version and `ShapeMismatch` when
    declared layer sizes disagree with the stored weights.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ModelLoadError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelLoadError(f"model file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelLoadError(f"model file {path} does not hold a bundle")
    return model_from_dict(doc)


__all__ = ["FORMAT_VERSION", "load_model", "model_from_dict", "model_to_dict", "save_model"]
