"""Input checks shared by the estimators."""

from __future__ import annotations

import numpy as np

from .errors import InvalidNoise, ShapeMismatch


def check_received(X) -> np.ndarray:
    """Coerce received samples to a 1-D complex array.

    Accepts a complex vector of length ``n`` or a real ``(n, 2)`` array of
    (in-phase, quadrature) pairs.
    """
    arr = np.asarray(X)
    if np.iscomplexobj(arr):
        arr = np.atleast_1d(arr)
        if arr.ndim != 1:
            raise ShapeMismatch(f"complex input must be 1-D, got shape {arr.shape}")
        out = arr.astype(complex)
    else:
        arr = np.asarray(arr, dtype=float)
        if arr.ndim == 1:
            out = arr.astype(complex)
        elif arr.ndim == 2 and arr.shape[1] == 2:
            out = arr[:, 0] + 1j * arr[:, 1]
        else:
            raise ShapeMismatch(f"expected complex (n,) or real (n, 2) input, got {arr.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("received samples contain NaN or inf")
    return out


def complex_to_features(y) -> np.ndarray:
    """Stack real and imaginary parts into an ``(n, 2)`` float array."""
    y = np.asarray(y, dtype=complex).reshape(-1)
    return np.stack([y.real, y.imag], axis=1)


def check_n0(n0) -> float:
    if n0 is None or not np.isfinite(n0) or not n0 > 0:
        raise InvalidNoise(f"noise variance must be positive and finite, got {n0!r}")
    return float(n0)


def check_priors(priors, n: int, k: int) -> np.ndarray | None:
    """Broadcast prior LLRs to ``(n, k)``; ``None`` passes through."""
    if priors is None:
        return None
    p = np.asarray(priors, dtype=float)
    if p.shape == (k,):
        p = np.broadcast_to(p, (n, k))
    if p.shape != (n, k):
        raise ShapeMismatch(f"priors must have shape ({k},) or ({n}, {k}), got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("prior LLRs must be finite")
    return p
