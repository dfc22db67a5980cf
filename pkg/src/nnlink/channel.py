"""AWGN channel and SNR bookkeeping.

Random streams are derived from ``(seed, *stream)`` through
`numpy.random.SeedSequence`, so batches that run in any order or on any
worker draw the same numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidNoise

__all__ = ["NoiseSpec", "make_rng", "db_to_linear", "ebn0_to_n0", "ebn0_to_esn0", "awgn"]


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for ``seed`` and an optional stream path."""
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(seq))


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def ebn0_to_esn0(ebn0_db, k: int, rate: float = 1.0):
    """Linear Es/N0 for unit-energy symbols carrying ``k * rate`` information bits."""
    return k * rate * db_to_linear(ebn0_db)


def ebn0_to_n0(ebn0_db, k: int, rate: float = 1.0):
    """Noise power spectral density for unit average symbol energy.

    >>> float(ebn0_to_n0(10.0, 4))
    0.025
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 < rate <= 1.0:
        raise ValueError("rate must lie in (0, 1]")
    n0 = 1.0 / ebn0_to_esn0(ebn0_db, k, rate)
    return float(n0) if np.ndim(n0) == 0 else n0


@dataclass(frozen=True)
class NoiseSpec:
    ebn0_db: float
    k: int
    rate: float = 1.0

    @property
    def n0(self) -> float:
        return ebn0_to_n0(self.ebn0_db, self.k, self.rate)


def awgn(x, n0: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise of total variance ``n0``.

    Each of the real and imaginary parts has variance ``n0 / 2``.
    """
    if not n0 > 0:
        raise InvalidNoise(f"noise variance must be positive, got {n0!r}")
    x = np.asarray(x, dtype=complex)
    noise = rng.standard_normal((2,) + x.shape)
    return x + np.sqrt(n0 / 2.0) * (noise[0] + 1j * noise[1])
