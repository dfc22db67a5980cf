"""Symbol-wise autoencoder transceiver trained end to end over AWGN.

The encoder turns a one-hot message into two reals, read as one complex
channel symbol and power normalized.  The decoder maps the noisy symbol to a
softmax posterior over the ``M`` messages.  Two architectures share the
same contracts:

``cnn``
    encoder: one-hot as a 1-channel length-M sequence -> conv -> conv ->
    dense(2); decoder: (Re, Im) as a 2-channel length-1 sequence -> conv ->
    conv -> dense(M) -> softmax.
``dnn``
    dense layers throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_received, complex_to_features
from .channel import awgn, ebn0_to_n0, make_rng
from .errors import ConfigInvalid, IndexOutOfRange, StaleCalibration
from .modem import bits_per_symbol
from .montecarlo import DEFAULT_BATCH, SweepRecord, count_errors
from .nn import AdamState, Conv1d, Dense, NeuralModel, adam_step, cce_with_logits

__all__ = [
    "VARIANTS",
    "AeTrainConfig",
    "Autoencoder",
    "LearnedConstellation",
    "one_hot",
    "build_encoder",
    "build_decoder",
    "normalize_batch",
    "normalize_batch_backward",
    "e2e_step",
    "encode",
    "decode",
    "infer_message",
    "train_e2e",
    "evaluate_ser",
    "extract_constellation",
    "cnn_param_count",
    "AETransceiver",
]

VARIANTS = ("cnn", "dnn")


def one_hot(m, order: int) -> np.ndarray:
    """One-hot vector(s) for zero-based message index ``m`` (scalar or array)."""
    idx = np.asarray(m)
    if np.any(idx < 0) or np.any(idx >= order):
        raise IndexOutOfRange(f"message index must lie in [0, {order}), got {m!r}")
    return np.eye(order)[idx]


def dnn_width(order: int) -> int:
    return max(16, 2 * order)


def build_encoder(order, variant="cnn", channels=(8, 8), kernel=3, hidden=None, rng=None):
    rng = make_rng(0) if rng is None else rng
    if variant == "cnn":
        c1, c2 = channels
        layers = [
            Conv1d(1, c1, kernel, "relu", rng=rng),
            Conv1d(c1, c2, kernel, "relu", rng=rng),
            Dense(c2 * order, 2, "identity", rng=rng),
        ]
        return NeuralModel(layers, input_shape=(1, order))
    if variant == "dnn":
        h = hidden or dnn_width(order)
        layers = [
            Dense(order, h, "relu", rng=rng),
            Dense(h, h, "relu", rng=rng),
            Dense(h, 2, "identity", rng=rng),
        ]
        return NeuralModel(layers, input_shape=(order,))
    raise ConfigInvalid(f"unknown variant {variant!r}; choose from {VARIANTS}")


def build_decoder(order, variant="cnn", channels=(8, 8), kernel=3, hidden=None, rng=None):
    rng = make_rng(0) if rng is None else rng
    if variant == "cnn":
        c1, c2 = channels
        layers = [
            Conv1d(2, c1, kernel, "relu", rng=rng),
            Conv1d(c1, c2, kernel, "relu", rng=rng),
            Dense(c2, order, "softmax", rng=rng),
        ]
        return NeuralModel(layers, input_shape=(2, 1))
    if variant == "dnn":
        h = hidden or dnn_width(order)
        layers = [
            Dense(2, h, "relu", rng=rng),
            Dense(h, h, "relu", rng=rng),
            Dense(h, order, "softmax", rng=rng),
        ]
        return NeuralModel(layers, input_shape=(2,))
    raise ConfigInvalid(f"unknown variant {variant!r}; choose from {VARIANTS}")


def cnn_param_count(order, channels=(8, 8), kernel=3) -> tuple[int, int]:
    """Parameter counts ``(encoder, decoder)`` of the CNN variant."""
    c1, c2 = channels
    enc = (c1 * kernel + c1) + (c2 * c1 * kernel + c2) + (2 * c2 * order + 2)
    dec = (c1 * 2 * kernel + c1) + (c2 * c1 * kernel + c2) + (order * c2 + order)
    return enc, dec


def normalize_batch(h):
    """Scale ``(batch, 2)`` encoder outputs to unit mean symbol power.

    Returns the scaled outputs and the mean power used.
    """
    power = np.mean(np.sum(h * h, axis=1))
    return h / np.sqrt(power), power


def normalize_batch_backward(grad_z, h, power):
    """Gradient w.r.t. ``h`` of a loss given its gradient w.r.t. ``normalize_batch(h)``."""
    n = h.shape[0]
    return grad_z / np.sqrt(power) - h * np.sum(grad_z * h) / (n * power ** 1.5)


def _to_complex(z):
    return z[:, 0] + 1j * z[:, 1]


@dataclass
class LearnedConstellation:
    """Codebook-normalized encoder outputs, one point per message."""

    points: np.ndarray
    scale: float

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    def min_distance(self) -> float:
        d = np.abs(self.points[:, None] - self.points[None, :])
        return float(d[~np.eye(len(self.points), dtype=bool)].min())

    def to_csv_rows(self):
        k = bits_per_symbol(self.order)
        for m, p in enumerate(self.points):
            yield m, format(m, f"0{k}b"), p.real, p.imag


class Autoencoder:
    """Encoder/decoder pair plus the codebook power calibration."""

    def __init__(self, encoder: NeuralModel, decoder: NeuralModel, order: int,
                 variant: str = "cnn", train_ebn0_db: float | None = None):
        self.encoder = encoder
        self.decoder = decoder
        self.order = int(order)
        self.variant = variant
        self.train_ebn0_db = train_ebn0_db
        self._scale = None
        self._calibrated_for = None

    @classmethod
    def build(cls, order, variant="cnn", seed=0, **arch):
        bits_per_symbol(order)
        rng = make_rng(seed, 0)
        enc = build_encoder(order, variant, rng=rng, **arch)
        dec = build_decoder(order, variant, rng=rng, **arch)
        return cls(enc, dec, order, variant)

    @property
    def k(self) -> int:
        return bits_per_symbol(self.order)

    def raw_codebook(self) -> np.ndarray:
        """Unnormalized encoder outputs for every message, shape ``(M, 2)``."""
        return self.encoder.predict(one_hot(np.arange(self.order), self.order))

    def calibrate(self) -> float:
        """Fix the inference power scale from the full codebook."""
        h = self.raw_codebook()
        self._scale = 1.0 / np.sqrt(np.mean(np.sum(h * h, axis=1)))
        self._calibrated_for = self.encoder.fingerprint()
        return self._scale

    @property
    def scale(self) -> float:
        if self._scale is None or self._calibrated_for != self.encoder.fingerprint():
            raise StaleCalibration("encoder changed since calibration; call calibrate()")
        return self._scale

    def codebook(self) -> np.ndarray:
        return _to_complex(self.raw_codebook() * self.scale)


def encode(ae: Autoencoder, messages) -> np.ndarray:
    """Complex channel symbol(s) for message index(es) or one-hot row(s)."""
    msgs = np.asarray(messages)
    if msgs.ndim >= 1 and msgs.shape[-1] == ae.order and msgs.dtype.kind == "f":
        idx = np.argmax(np.atleast_2d(msgs), axis=1)
        scalar = msgs.ndim == 1
    else:
        idx = np.atleast_1d(msgs)
        scalar = msgs.ndim == 0
        one_hot(idx, ae.order)
    z = ae.codebook()[idx]
    return z[0] if scalar else z


def _decoder_logits(ae, y):
    return ae.decoder.predict(complex_to_features(y), upto_logits=True)


def decode(ae: Autoencoder, y) -> np.ndarray:
    """Posterior over messages: ``(M,)`` for a scalar, else ``(n, M)``."""
    scalar = np.ndim(y) == 0
    p = ae.decoder.predict(complex_to_features(np.atleast_1d(y)))
    return p[0] if scalar else p


def infer_message(ae_or_posterior, y=None):
    """Arg-max message index, lowest index on ties.

    Pass either a posterior array, or an `Autoencoder` and received sample(s).
    """
    if y is None:
        p = np.asarray(ae_or_posterior)
        out = np.argmax(p, axis=-1)
    else:
        out = np.argmax(_decoder_logits(ae_or_posterior, np.atleast_1d(y)), axis=-1)
        if np.ndim(y) == 0:
            out = out[0]
    return int(out) if np.ndim(out) == 0 else out


@dataclass
class AeTrainConfig:
    order: int
    variant: str = "cnn"
    batch_size: int = 1024
    iterations: int = 20_000
    learning_rate: float = 1e-2
    train_ebn0_db: float = 10.0
    seed: int = 0
    final_lr_fraction: float = 0.01

    def validate(self) -> None:
        bits_per_symbol(self.order)
        if self.variant not in VARIANTS:
            raise ConfigInvalid(f"variant must be one of {VARIANTS}")
        if self.batch_size < 1 or self.iterations < 1:
            raise ConfigInvalid("batch_size and iterations must be >= 1")
        if not self.learning_rate > 0 or not 0 < self.final_lr_fraction <= 1:
            raise ConfigInvalid("learning rate settings out of range")


def e2e_step(ae: Autoencoder, messages, noise, return_parts=False):
    """Loss and parameter gradients for one batch with given channel noise.

    ``noise`` is the complex noise added per message.  The encoder runs once
    on the ``M`` distinct one-hot inputs; per-message outputs are gathered
    and their gradients summed back, which gives the same gradients as a
    full batch pass.  Gradients come back as ``(encoder_grads, decoder_grads)``.
    """
    messages = np.asarray(messages)
    codes, enc_cache = ae.encoder.forward(np.eye(ae.order))
    h = codes[messages]
    z, power = normalize_batch(h)
    y = z + np.stack([noise.real, noise.imag], axis=1)
    logits, dec_cache = ae.decoder.forward(y, upto_logits=True)
    loss, g_logits = cce_with_logits(logits, one_hot(messages, ae.order))
    dec_grads, g_y = ae.decoder.backward(dec_cache, g_logits, wrt_logits=True,
                                         return_input_grad=True)
    g_y = g_y.reshape(y.shape)
    g_z = g_y  # additive channel passes the gradient through unchanged
    g_h = normalize_batch_backward(g_z, h, power)
    g_codes = np.zeros_like(codes)
    np.add.at(g_codes, messages, g_h)
    enc_grads = ae.encoder.backward(enc_cache, g_codes)
    if return_parts:
        return loss, enc_grads, dec_grads, {"grad_decoder_input": g_y, "grad_encoder_output": g_z,
                                            "z": z, "y": y}
    return loss, enc_grads, dec_grads


def train_e2e(config: AeTrainConfig, ae: Autoencoder | None = None):
    """Jointly train encoder and decoder with Adam on the CCE loss.

    The step size decays geometrically to ``final_lr_fraction`` of its start
    value over the run.  Returns ``(autoencoder, losses)``; the autoencoder
    is calibrated on exit.
    """
    config.validate()
    if ae is None:
        ae = Autoencoder.build(config.order, config.variant, seed=config.seed)
    ae.train_ebn0_db = float(config.train_ebn0_db)
    n0 = ebn0_to_n0(config.train_ebn0_db, bits_per_symbol(config.order))
    enc_state = AdamState(lr=config.learning_rate)
    dec_state = AdamState(lr=config.learning_rate)
    decay = config.final_lr_fraction ** (1.0 / max(config.iterations - 1, 1))
    rng = make_rng(config.seed, 1)
    losses = np.empty(config.iterations)
    for it in range(config.iterations):
        msgs = rng.integers(0, config.order, size=config.batch_size)
        noise = awgn(np.zeros(config.batch_size), n0, rng)
        loss, enc_grads, dec_grads = e2e_step(ae, msgs, noise)
        lr = config.learning_rate * decay ** it
        enc_state.lr = dec_state.lr = lr
        ae.encoder.set_params(adam_step(ae.encoder.params, enc_grads, enc_state))
        ae.decoder.set_params(adam_step(ae.decoder.params, dec_grads, dec_state))
        losses[it] = loss
    ae.calibrate()
    return ae, losses


def extract_constellation(ae: Autoencoder) -> LearnedConstellation:
    scale = ae.calibrate() if ae._calibrated_for != ae.encoder.fingerprint() else ae.scale
    return LearnedConstellation(ae.codebook(), float(scale))


def _symbol_error_counter(ae, codebook, n0):
    def count(rng, n):
        msgs = rng.integers(0, ae.order, size=n)
        y = awgn(codebook[msgs], n0, rng)
        return np.count_nonzero(infer_message(ae, y) != msgs)

    return count


def evaluate_ser(ae: Autoencoder, ebn0_db_points, messages_per_point: int, seed: int,
                 batch: int = DEFAULT_BATCH, workers: int = 1, system: str | None = None):
    """Monte Carlo SER of arg-max decisions over a sweep of Eb/N0 points."""
    if messages_per_point < 1000:
        raise ConfigInvalid("need at least 1000 messages per point")
    codebook = ae.codebook()
    system = system or f"ae_{ae.variant}"
    records = []
    for i, snr in enumerate(ebn0_db_points):
        counter = _symbol_error_counter(ae, codebook, ebn0_to_n0(snr, ae.k))
        errors = count_errors(counter, messages_per_point, seed, i, batch, workers)
        records.append(SweepRecord.measured(system, ae.order, snr, "ser", errors,
                                            messages_per_point, seed, variant=ae.variant,
                                            train_snr_db=ae.train_ebn0_db))
    return records


class AETransceiver(BaseEstimator):
    """Scikit-learn style wrapper: ``fit`` trains, ``transform`` encodes,
    ``predict`` / ``predict_proba`` decode received samples."""

    def __init__(self, order=16, variant="cnn", train_ebn0_db=10.0, batch_size=1024,
                 n_iter=20_000, learning_rate=1e-2, random_state=0):
        self.order = order
        self.variant = variant
        self.train_ebn0_db = train_ebn0_db
        self.batch_size = batch_size
        self.n_iter = n_iter
        self.learning_rate = learning_rate
        self.random_state = random_state

    def fit(self, X=None, y=None):
        config = AeTrainConfig(self.order, self.variant, self.batch_size, self.n_iter,
                               self.learning_rate, self.train_ebn0_db,
                               0 if self.random_state is None else int(self.random_state))
        self.autoencoder_, self.loss_curve_ = train_e2e(config)
        self.n_iter_ = len(self.loss_curve_)
        return self

    @property
    def constellation_(self) -> LearnedConstellation:
        check_is_fitted(self, "autoencoder_")
        return extract_constellation(self.autoencoder_)

    def transform(self, X):
        """Channel symbols for message indices ``X``."""
        check_is_fitted(self, "autoencoder_")
        return encode(self.autoencoder_, np.asarray(X).reshape(-1))

    def predict_proba(self, X):
        check_is_fitted(self, "autoencoder_")
        return decode(self.autoencoder_, check_received(X))

    def predict(self, X):
        check_is_fitted(self, "autoencoder_")
        return infer_message(self.autoencoder_, check_received(X))

    def score(self, X, y):
        """Fraction of received samples decoded to the right message."""
        return float(np.mean(self.predict(X) == np.asarray(y)))
