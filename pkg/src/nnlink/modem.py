"""Bit grouping, Gray-labelled square QAM constellations and hard demodulation.

Symbol indices are zero based and equal the integer value of the label read
most-significant bit first, so ``points[m]`` carries label ``labels[m]`` and
``labels[m]`` is the binary expansion of ``m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonDivisibleLength, UnsupportedOrder

SUPPORTED_ORDERS = (2, 4, 16, 64, 256)

__all__ = [
    "SUPPORTED_ORDERS",
    "Constellation",
    "bits_per_symbol",
    "gray_code",
    "group_bits",
    "build_constellation",
    "modulate",
    "nearest_symbol",
    "demodulate_hard",
    "bits_to_indices",
    "indices_to_bits",
]


def bits_per_symbol(order: int) -> int:
    """Return ``log2(order)``, raising `UnsupportedOrder` for unsupported orders."""
    if order not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(
            f"modulation order {order!r} not supported; choose from {SUPPORTED_ORDERS}"
        )
    return int(order).bit_length() - 1


def gray_code(n_bits: int) -> np.ndarray:
    """Reflected binary Gray code: entry ``j`` is the label at position ``j``."""
    j = np.arange(1 << n_bits, dtype=np.int64)
    return j ^ (j >> 1)


def indices_to_bits(indices, k: int) -> np.ndarray:
    """Expand symbol indices into an ``(n, k)`` array of label bits, MSB first."""
    indices = np.asarray(indices, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    return ((indices[..., None] >> shifts) & 1).astype(np.int8)


def bits_to_indices(blocks) -> np.ndarray:
    """Inverse of `indices_to_bits` over the last axis."""
    blocks = np.asarray(blocks, dtype=np.int64)
    k = blocks.shape[-1]
    weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
    return blocks @ weights


def _as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D bit sequence, got shape {arr.shape}")
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError("bit sequence may only contain 0 and 1")
    return arr.astype(np.int8)


def group_bits(bits, k: int) -> np.ndarray:
    """Partition a bit sequence into consecutive ``k``-bit blocks.

    Parameters
    ----------
    bits : array_like of {0, 1}
        Sequence of length ``n``.
    k : int
        Block length, at least one.

    Returns
    -------
    ndarray of shape (n // k, k)
        Row ``i`` holds bits ``i*k .. (i+1)*k - 1`` in order.

    Raises
    ------
    NonDivisibleLength
        If ``n`` is not a multiple of ``k``.
    """
    if k < 1:
        raise ValueError("block length must be at least 1")
    arr = _as_bits(bits)
    if arr.size % k:
        raise NonDivisibleLength(f"{arr.size} bits cannot be split into {k}-bit blocks")
    return arr.reshape(-1, k)


@dataclass(frozen=True)
class Constellation:
    """Unit average energy point set with per-point bit labels.

    Attributes
    ----------
    order : int
        Number of points ``M``.
    points : ndarray of complex, shape (M,)
        Normalized points; ``points[m]`` carries ``labels[m]``.
    labels : ndarray of int8, shape (M, k)
        Bit label of every point.
    alpha : float
        Scale applied to the raw odd-integer grid.
    """

    order: int
    points: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    alpha: float

    @property
    def k(self) -> int:
        return self.labels.shape[1]

    @property
    def mean_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    @property
    def bipolar_labels(self) -> np.ndarray:
        """Labels mapped 0 -> -1, 1 -> +1."""
        return 2.0 * self.labels - 1.0

    def grid_coordinates(self) -> np.ndarray:
        """Integer (column, row) position of each point on the raw QAM grid."""
        raw = self.points / self.alpha
        side = int(round(np.sqrt(self.order))) if self.order > 2 else 2
        col = np.rint((raw.real + side - 1) / 2).astype(int)
        row = np.rint((raw.imag + side - 1) / 2).astype(int)
        return np.stack([col, row], axis=1)

    def to_csv_rows(self):
        for m, (point, label) in enumerate(zip(self.points, self.labels)):
            yield m, "".join(str(int(b)) for b in label), point.real, point.imag


def build_constellation(order: int) -> Constellation:
    """Build the Gray-labelled, unit energy BPSK or square QAM constellation.

    For ``order >= 4`` the raw points sit on a ``sqrt(M) x sqrt(M)`` grid of
    odd integers.  The first half of each label picks the in-phase level and
    the second half the quadrature level, each through a reflected Gray code,
    so grid neighbours differ in exactly one bit.  BPSK maps bit 1 to +1.
    """
    k = bits_per_symbol(order)
    indices = np.arange(order)
    labels = indices_to_bits(indices, k)
    if order == 2:
        raw = np.where(labels[:, 0] == 1, 1.0, -1.0).astype(complex)
    else:
        half = k // 2
        side = 1 << half
        # position along an axis for each Gray label value
        position = np.argsort(gray_code(half))
        levels = 2.0 * position - (side - 1)
        i_val = bits_to_indices(labels[:, :half])
        q_val = bits_to_indices(labels[:, half:])
        raw = levels[i_val] + 1j * levels[q_val]
    e_avg = np.mean(np.abs(raw) ** 2)
    alpha = 1.0 / np.sqrt(e_avg)
    points = raw * alpha
    points.setflags(write=False)
    labels.setflags(write=False)
    return Constellation(order=order, points=points, labels=labels, alpha=float(alpha))


def modulate(bits, constellation: Constellation) -> np.ndarray:
    """Map a bit sequence to normalized complex symbols, ``k`` bits per symbol."""
    blocks = group_bits(bits, constellation.k)
    return constellation.points[bits_to_indices(blocks)]


def nearest_symbol(y, constellation: Constellation):
    """Index of the closest constellation point; ties go to the lowest index.

    Accepts a scalar or an array of received values and returns the same shape.
    """
    y_arr = np.asarray(y, dtype=complex)
    d2 = np.abs(y_arr[..., None] - constellation.points) ** 2
    idx = np.argmin(d2, axis=-1)
    return int(idx) if idx.ndim == 0 else idx


def demodulate_hard(y, constellation: Constellation) -> np.ndarray:
    """Minimum-distance symbol decisions expanded back into a flat bit sequence."""
    idx = np.atleast_1d(nearest_symbol(y, constellation))
    return constellation.labels[idx].reshape(-1)
