"""Closed-form error-rate references for square M-QAM over AWGN."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import erfc

from .errors import UnsupportedOrder

__all__ = [
    "LinkBudget",
    "q_function",
    "ser_mqam",
    "ser_mqam_exact",
    "ber_paper",
    "ber_gray_approx",
]

_SQUARE = (4, 16, 64, 256)


def q_function(x):
    """Gaussian tail probability ``Q(x) = 0.5 * erfc(x / sqrt(2))``."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def _check_square(order: int) -> None:
    if order not in _SQUARE:
        raise UnsupportedOrder(f"square M-QAM expected, got M={order}")


def ser_mqam(esn0, order: int):
    """Approximate SER of Gray square M-QAM at linear Es/N0.

    ``4 (sqrt(M) - 1) / sqrt(M) * Q(sqrt(3 esn0 / (M - 1)))``; the squared
    cross term is dropped, so the value sits slightly above the exact SER at
    low SNR.  Capped at 1, which only binds far below 0 dB for M >= 16.
    """
    _check_square(order)
    esn0 = np.asarray(esn0, dtype=float)
    if np.any(esn0 <= 0):
        raise ValueError("esn0 must be positive")
    root = math.sqrt(order)
    out = 4.0 * (root - 1.0) / root * q_function(np.sqrt(3.0 * esn0 / (order - 1)))
    out = np.minimum(out, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def ser_mqam_exact(esn0, order: int):
    """Exact minimum-distance SER of square M-QAM (keeps the ``Q**2`` term)."""
    _check_square(order)
    root = math.sqrt(order)
    p = 2.0 * (root - 1.0) / root * q_function(np.sqrt(3.0 * np.asarray(esn0, float) / (order - 1)))
    out = 1.0 - (1.0 - p) ** 2
    return float(out) if np.ndim(out) == 0 else out


def ber_paper(ser, order: int):
    """BER under uniformly spread bit errors: ``(M/2) / (M-1) * SER``."""
    return (order / 2.0) / (order - 1.0) * ser


def ber_gray_approx(ser, order: int):
    """Gray-coding BER approximation ``SER / log2(M)``."""
    return ser / math.log2(order)


@dataclass(frozen=True)
class LinkBudget:
    """Physical link quantities and the Es/N0 they imply.

    With signal power ``P_s`` spread over bandwidth ``B`` and bit rate ``R``,
    ``Eb/N0 = P_s / (N0 R)`` and ``Es/N0 = log2(M) Eb/N0``.  ``snr_term`` is
    the quantity ``P_s B / (log2(M) (M-1) N0 R)`` that appears under the
    square root of the SER expression.  It reduces to ``B Eb/N0 / (log2(M) (M-1))``,
    so taking ``B = log2(M)**2`` makes it ``esn0 / (M - 1)``.
    """

    signal_power: float
    bandwidth: float
    bit_rate: float
    n0: float
    order: int

    def __post_init__(self):
        for name in ("signal_power", "bandwidth", "bit_rate", "n0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        _check_square(self.order)

    @property
    def ebn0(self) -> float:
        return self.signal_power / (self.n0 * self.bit_rate)

    @property
    def esn0(self) -> float:
        return math.log2(self.order) * self.ebn0

    @property
    def snr_term(self) -> float:
        k = math.log2(self.order)
        return self.signal_power * self.bandwidth / (k * (self.order - 1) * self.n0 * self.bit_rate)

    @classmethod
    def from_ebn0_db(cls, ebn0_db: float, order: int, bit_rate: float = 1.0):
        """Budget at unit signal power whose ``snr_term`` is ``esn0 / (M-1)``."""
        k = math.log2(order)
        n0 = 1.0 / (bit_rate * 10.0 ** (ebn0_db / 10.0))
        return cls(1.0, k * k, bit_rate, n0, order)

    def ser(self) -> float:
        root = math.sqrt(self.order)
        return min(1.0, 4.0 * (root - 1.0) / root * q_function(math.sqrt(3.0 * self.snr_term)))
