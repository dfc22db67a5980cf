"""Monte Carlo sweeps over Eb/N0 for every system the package implements.

All measured systems draw bits (or messages) and noise from the same
per-batch streams, so two sweeps with one seed are paired sample for sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..app_demapper import hard_decide, llr_no_prior
from ..autoencoder import Autoencoder, evaluate_ser
from ..channel import awgn, ebn0_to_esn0, ebn0_to_n0
from ..errors import ConfigInvalid
from ..modem import bits_per_symbol, bits_to_indices, build_constellation, nearest_symbol
from ..montecarlo import DEFAULT_BATCH, SweepRecord, count_errors
from ..nn_demapper import DemapperModel, evaluate_ber
from ..theory import ber_gray_approx, ber_paper, ser_mqam

SYSTEMS = ("app", "nn_demapper", "ae_cnn", "ae_dnn", "theory")
MIN_TRIALS = 1000


def snr_grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive dB grid; ``stop`` is kept when it lands on the grid."""
    if step <= 0:
        raise ConfigInvalid("snr step must be positive")
    if stop < start:
        raise ConfigInvalid("snr stop must not be below snr start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(round(start + i * step, 10)) for i in range(n))


@dataclass(frozen=True)
class SweepSpec:
    """What to simulate: ``trials`` counts bits for BER and messages for SER."""

    system: str
    M: int
    ebn0_db: tuple
    trials: int = 1_000_000
    seed: int = 0
    model_path: str | None = None
    metric: str | None = None
    batch: int = DEFAULT_BATCH
    workers: int = 1

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ConfigInvalid(f"system must be one of {SYSTEMS}, got {self.system!r}")
        bits_per_symbol(self.M)
        if len(self.ebn0_db) == 0:
            raise ConfigInvalid("at least one Eb/N0 point is required")
        object.__setattr__(self, "ebn0_db", tuple(float(s) for s in self.ebn0_db))
        if self.system != "theory" and self.trials < MIN_TRIALS:
            raise ConfigInvalid(f"trials must be >= {MIN_TRIALS}")
        if self.metric not in (None, "ber", "ser"):
            raise ConfigInvalid("metric must be 'ber' or 'ser'")
        if self.system.startswith("ae_") and self.metric == "ber":
            raise ConfigInvalid("autoencoder systems are scored per message (ser)")
        if self.system == "nn_demapper" and self.metric == "ser":
            raise ConfigInvalid("the neural demapper is scored per bit (ber)")

    @property
    def resolved_metric(self) -> str:
        if self.metric is not None:
            return self.metric
        return "ser" if self.system.startswith("ae_") else "ber"


def _app_bit_counter(constellation, n0):
    # same draw order as the neural demapper evaluator, so the two are paired
    k = constellation.k

    def count(rng, n_bits):
        bits = rng.integers(0, 2, size=(n_bits // k, k))
        y = awgn(constellation.points[bits_to_indices(bits)], n0, rng)
        return np.count_nonzero(hard_decide(llr_no_prior(y, constellation, n0)) != bits)

    return count


def _app_symbol_counter(constellation, n0):
    def count(rng, n):
        sent = rng.integers(0, constellation.order, size=n)
        y = awgn(constellation.points[sent], n0, rng)
        return np.count_nonzero(nearest_symbol(y, constellation) != sent)

    return count


def app_sweep(M, ebn0_db_points, trials, seed, metric="ber", batch=DEFAULT_BATCH, workers=1):
    """APP demapper error rates: hard LLR signs (ber) or nearest point (ser)."""
    constellation = build_constellation(M)
    k = constellation.k
    if metric == "ber":
        trials -= trials % k
        batch -= batch % k
    make = _app_bit_counter if metric == "ber" else _app_symbol_counter
    records = []
    for i, snr in enumerate(ebn0_db_points):
        errors = count_errors(make(constellation, ebn0_to_n0(snr, k)), trials, seed, i,
                              batch, workers)
        records.append(SweepRecord.measured("app", M, snr, metric, errors, trials, seed))
    return records


def theory_records(M, ebn0_db_points, metric="ber"):
    """Closed-form curves; BER comes in two labelled variants, ``gray`` and ``paper``."""
    k = bits_per_symbol(M)
    records = []
    for snr in ebn0_db_points:
        ser = float(ser_mqam(ebn0_to_esn0(snr, k), M))
        if metric == "ser":
            records.append(SweepRecord("theory", M, float(snr), "ser", ser, None, None, None))
            continue
        for variant, ber in (("gray", ber_gray_approx(ser, M)), ("paper", ber_paper(ser, M))):
            records.append(SweepRecord("theory", M, float(snr), "ber", float(ber), None, None,
                                       None, variant=variant))
    return records


def mc_sweep(spec: SweepSpec, model=None) -> list[SweepRecord]:
    """Run one sweep.  Trained systems take ``model`` or load ``spec.model_path``."""
    metric = spec.resolved_metric
    if spec.system == "theory":
        return theory_records(spec.M, spec.ebn0_db, metric)
    if spec.system == "app":
        return app_sweep(spec.M, spec.ebn0_db, spec.trials, spec.seed, metric, spec.batch,
                         spec.workers)
    if model is None:
        if spec.model_path is None:
            raise ConfigInvalid(f"system {spec.system!r} needs a trained model")
        from .persistence import load_model

        model = load_model(spec.model_path)
    if spec.system == "nn_demapper":
        if not isinstance(model, DemapperModel):
            raise ConfigInvalid("nn_demapper sweep needs a demapper model")
        _check_order(model.order, spec.M)
        return evaluate_ber(model, spec.ebn0_db, spec.trials, spec.seed, spec.batch,
                            spec.workers)
    if not isinstance(model, Autoencoder) or f"ae_{model.variant}" != spec.system:
        raise ConfigInvalid(f"{spec.system} sweep needs a matching autoencoder model")
    _check_order(model.order, spec.M)
    return evaluate_ser(model, spec.ebn0_db, spec.trials, spec.seed, spec.batch, spec.workers)


def _check_order(model_order, M):
    if model_order != M:
        raise ConfigInvalid(f"model was built for M={model_order}, sweep asks for M={M}")


__all__ = ["MIN_TRIALS", "SYSTEMS", "SweepSpec", "app_sweep", "mc_sweep", "snr_grid",
           "theory_records"]
