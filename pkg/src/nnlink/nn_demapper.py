"""Bit-wise neural demapper: (Re y, Im y) -> three dense layers -> k LLRs.

The network output is read as LLR logits with the same sign convention as
the APP demapper.  Training applies a sigmoid and minimizes binary
cross-entropy against the transmitted bits at one fixed Eb/N0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_received, complex_to_features
from .app_demapper import hard_decide
from .channel import awgn, ebn0_to_n0, make_rng
from .errors import ConfigInvalid, ShapeMismatch
from .modem import Constellation, bits_per_symbol, bits_to_indices, build_constellation
from .montecarlo import DEFAULT_BATCH, SweepRecord, count_errors
from .nn import AdamState, Dense, NeuralModel, adam_step, bce_with_logits

__all__ = [
    "DEFAULT_TRAIN_EBN0_DB",
    "DemapperModel",
    "DemapperTrainConfig",
    "build_demapper",
    "demap_nn",
    "train_demapper",
    "evaluate_ber",
    "NeuralDemapper",
]

# Train SNR per order, chosen so the learned boundaries hold up across each
# order's evaluation range.
DEFAULT_TRAIN_EBN0_DB = {2: 4.0, 4: 4.0, 16: 8.0, 64: 12.0, 256: 16.0}


@dataclass
class DemapperModel:
    network: NeuralModel
    order: int
    train_ebn0_db: float | None = None

    @property
    def k(self) -> int:
        return bits_per_symbol(self.order)


@dataclass
class DemapperTrainConfig:
    """Training settings; ``batch_size`` counts symbols (``batch_size * k`` bits)."""

    train_ebn0_db: float
    batch_size: int = 1024
    iterations: int = 10_000
    learning_rate: float = 1e-3
    seed: int = 0
    adam: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.batch_size < 1:
            raise ConfigInvalid("batch_size must be >= 1")
        if self.iterations < 1:
            raise ConfigInvalid("iterations must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigInvalid("learning_rate must be positive")
        if not np.isfinite(self.train_ebn0_db):
            raise ConfigInvalid("train_ebn0_db must be finite")


def build_demapper(order: int, widths=(64, 64), seed: int = 0) -> DemapperModel:
    """Randomly initialized demapper ``2 -> H1 -> H2 -> k`` (relu, relu, identity)."""
    k = bits_per_symbol(order)
    if len(widths) != 2:
        raise ValueError("the demapper has exactly two hidden layers")
    rng = make_rng(seed)
    h1, h2 = (int(w) for w in widths)
    net = NeuralModel(
        [
            Dense(2, h1, "relu", rng=rng),
            Dense(h1, h2, "relu", rng=rng),
            Dense(h2, k, "identity", rng=rng),
        ],
        input_shape=(2,),
    )
    return DemapperModel(net, order)


def demap_nn(model: DemapperModel, y) -> np.ndarray:
    """LLR logits for received sample(s): ``(k,)`` for a scalar, else ``(n, k)``."""
    scalar = np.ndim(y) == 0
    feats = complex_to_features(np.atleast_1d(y))
    out = model.network.predict(feats)
    return out[0] if scalar else out


def _train_step(net, state, feats, bits):
    logits, cache = net.forward(feats)
    loss, g = bce_with_logits(logits, bits)
    grads = net.backward(cache, g)
    net.set_params(adam_step(net.params, grads, state))
    return loss


def train_demapper(config: DemapperTrainConfig, constellation: Constellation,
                   model: DemapperModel | None = None, widths=(64, 64)):
    """Train at a fixed Eb/N0 on freshly simulated data every iteration.

    Returns ``(model, losses)`` with one BCE value per iteration.
    """
    config.validate()
    if model is None:
        model = build_demapper(constellation.order, widths, seed=config.seed)
    model.train_ebn0_db = float(config.train_ebn0_db)
    k = constellation.k
    n0 = ebn0_to_n0(config.train_ebn0_db, k)
    state = AdamState(lr=config.learning_rate, **config.adam)
    rng = make_rng(config.seed, 1)
    losses = np.empty(config.iterations)
    for it in range(config.iterations):
        bits = rng.integers(0, 2, size=(config.batch_size, k))
        x = constellation.points[bits_to_indices(bits)]
        y = awgn(x, n0, rng)
        losses[it] = _train_step(model.network, state, complex_to_features(y), bits)
    return model, losses


def _bit_error_counter(model, constellation, n0):
    k = constellation.k

    def count(rng, n_bits):
        bits = rng.integers(0, 2, size=(n_bits // k, k))
        y = awgn(constellation.points[bits_to_indices(bits)], n0, rng)
        return np.count_nonzero(hard_decide(demap_nn(model, y)) != bits)

    return count


def evaluate_ber(model: DemapperModel, ebn0_db_points, bits_per_point: int, seed: int,
                 batch: int = DEFAULT_BATCH, workers: int = 1, system: str = "nn_demapper"):
    """Monte Carlo BER of hard decisions on the network's LLR signs."""
    constellation = build_constellation(model.order)
    k = constellation.k
    if bits_per_point < 10 * k:
        raise ConfigInvalid(f"need at least {10 * k} bits per point")
    bits_per_point -= bits_per_point % k
    batch -= batch % k
    records = []
    for i, snr in enumerate(ebn0_db_points):
        counter = _bit_error_counter(model, constellation, ebn0_to_n0(snr, k))
        errors = count_errors(counter, bits_per_point, seed, i, batch, workers)
        records.append(SweepRecord.measured(system, model.order, snr, "ber", errors,
                                            bits_per_point, seed,
                                            train_snr_db=model.train_ebn0_db))
    return records


class NeuralDemapper(BaseEstimator):
    """Scikit-learn style wrapper around the neural demapper.

    ``fit()`` without data trains on simulated AWGN samples at
    ``train_ebn0_db``.  ``fit(X, y)`` instead trains on given received samples
    ``X`` and their transmitted bits ``y`` of shape ``(n, k)``.

    Attributes
    ----------
    model_ : DemapperModel
    constellation_ : Constellation
    loss_curve_ : ndarray
        BCE per iteration.
    """

    def __init__(self, order=16, hidden=(64, 64), train_ebn0_db=None, batch_size=1024,
                 n_iter=10_000, learning_rate=1e-3, random_state=0):
        self.order = order
        self.hidden = hidden
        self.train_ebn0_db = train_ebn0_db
        self.batch_size = batch_size
        self.n_iter = n_iter
        self.learning_rate = learning_rate
        self.random_state = random_state

    def _train_snr(self):
        if self.train_ebn0_db is not None:
            return float(self.train_ebn0_db)
        return DEFAULT_TRAIN_EBN0_DB[self.order]

    def fit(self, X=None, y=None):
        self.constellation_ = build_constellation(self.order)
        seed = 0 if self.random_state is None else int(self.random_state)
        config = DemapperTrainConfig(self._train_snr(), self.batch_size, self.n_iter,
                                     self.learning_rate, seed)
        if X is None:
            self.model_, self.loss_curve_ = train_demapper(config, self.constellation_,
                                                           widths=self.hidden)
        else:
            self.model_, self.loss_curve_ = self._fit_dataset(config, X, y)
        self.n_iter_ = len(self.loss_curve_)
        return self

    def _fit_dataset(self, config, X, y):
        config.validate()
        feats = complex_to_features(check_received(X))
        k = self.constellation_.k
        bits = np.asarray(y).reshape(len(feats), -1)
        if bits.shape[1] != k:
            raise ShapeMismatch(f"targets must have {k} bits per sample")
        model = build_demapper(self.order, self.hidden, seed=config.seed)
        model.train_ebn0_db = None
        state = AdamState(lr=config.learning_rate)
        rng = make_rng(config.seed, 2)
        losses = np.empty(config.iterations)
        for it in range(config.iterations):
            idx = rng.integers(0, len(feats), size=min(config.batch_size, len(feats)))
            losses[it] = _train_step(model.network, state, feats[idx], bits[idx])
        return model, losses

    def transform(self, X):
        """LLR logits of shape ``(n, k)``."""
        check_is_fitted(self, "model_")
        return demap_nn(self.model_, check_received(X))

    decision_function = transform

    def predict_proba(self, X):
        """Per-bit probabilities of a 1, shape ``(n, k)``."""
        z = self.transform(X)
        return 0.5 * (1.0 + np.tanh(0.5 * z))

    def predict(self, X):
        return hard_decide(self.transform(X))

    def score(self, X, y):
        """Fraction of correctly decided bits."""
        return float(np.mean(self.predict(X) == np.asarray(y).reshape(len(check_received(X)), -1)))
