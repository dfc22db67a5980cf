"""Exact a-posteriori-probability soft demapping over AWGN.

LLRs follow ``log P(b=1 | y) / P(b=0 | y)``: positive values favour bit 1.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_n0, check_priors, check_received
from .channel import ebn0_to_n0
from .modem import Constellation, build_constellation

__all__ = [
    "symbol_prior",
    "log_symbol_prior",
    "llr",
    "llr_no_prior",
    "hard_decide",
    "demap_sequence",
    "APPDemapper",
]

_CHUNK = 1 << 15


def log_symbol_prior(point_labels, priors) -> np.ndarray:
    """Log of `symbol_prior`, evaluated as ``-sum softplus(-p * l)``."""
    z = np.asarray(priors, dtype=float) * np.asarray(point_labels, dtype=float)
    return -np.sum(np.logaddexp(0.0, -z), axis=-1)


def symbol_prior(point_labels, priors):
    """Prior probability of a point from its bipolar label and the bit prior LLRs.

    ``prod_m sigmoid(p_m * l_m)`` with ``l_m`` in {-1, +1}.
    """
    out = np.exp(log_symbol_prior(point_labels, priors))
    return float(out) if np.ndim(out) == 0 else out


def _bit_partitions(constellation: Constellation):
    labels = constellation.labels
    ones = [np.flatnonzero(labels[:, j] == 1) for j in range(constellation.k)]
    zeros = [np.flatnonzero(labels[:, j] == 0) for j in range(constellation.k)]
    return ones, zeros


def _llr_block(y, constellation, n0, priors):
    # -|y - x|^2 with the common -|y|^2 dropped; it cancels in every ratio and
    # would otherwise swamp the metric differences for large |y| / n0
    x = constellation.points[None, :]
    metric = (2.0 * (y[:, None] * np.conj(x)).real - np.abs(x) ** 2) / n0
    if priors is not None:
        metric = metric + log_symbol_prior(constellation.bipolar_labels[None, :, :], priors[:, None, :])
    ones, zeros = _bit_partitions(constellation)
    out = np.empty((y.size, constellation.k))
    for j in range(constellation.k):
        out[:, j] = logsumexp(metric[:, ones[j]], axis=1) - logsumexp(metric[:, zeros[j]], axis=1)
    return out


def llr(y, constellation: Constellation, n0: float, priors=None) -> np.ndarray:
    """Per-bit LLRs of received samples given prior bit LLRs.

    Parameters
    ----------
    y : complex or array_like of complex
        Received sample(s).
    constellation : Constellation
    n0 : float
        Noise variance, strictly positive.
    priors : array_like, optional
        Prior LLRs of shape ``(k,)`` or ``(n, k)``.  ``None`` means uniform.

    Returns
    -------
    ndarray
        Shape ``(k,)`` for a scalar ``y``, otherwise ``(n, k)``.
    """
    n0 = check_n0(n0)
    scalar = np.ndim(y) == 0
    y_arr = np.atleast_1d(np.asarray(y, dtype=complex)).reshape(-1)
    p = check_priors(priors, y_arr.size, constellation.k)
    if p is not None and not np.any(p):
        p = None
    out = np.empty((y_arr.size, constellation.k))
    for start in range(0, y_arr.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        out[sl] = _llr_block(y_arr[sl], constellation, n0, None if p is None else p[sl])
    return out[0] if scalar else out


def llr_no_prior(y, constellation: Constellation, n0: float) -> np.ndarray:
    """LLRs under uniform symbol priors."""
    return llr(y, constellation, n0, None)


def hard_decide(llrs) -> np.ndarray:
    """Bit 1 where the LLR is strictly positive, else 0."""
    return (np.asarray(llrs) > 0).astype(np.int8)


def demap_sequence(y, constellation: Constellation, n0: float, priors=None) -> np.ndarray:
    """Soft-demap a received sequence and return the flat hard-decided bit sequence."""
    y_arr = np.atleast_1d(np.asarray(y, dtype=complex)).reshape(-1)
    return hard_decide(llr(y_arr, constellation, n0, priors)).reshape(-1)


class APPDemapper(BaseEstimator):
    """Estimator wrapper around the exact soft demapper.

    Exactly one of ``n0`` or ``ebn0_db`` sets the assumed noise variance.
    ``fit`` only builds the constellation; there is nothing to learn.

    Parameters
    ----------
    order : int, default=16
    ebn0_db : float, optional
    n0 : float, optional
    """

    def __init__(self, order=16, ebn0_db=None, n0=None):
        self.order = order
        self.ebn0_db = ebn0_db
        self.n0 = n0

    def fit(self, X=None, y=None):
        self.constellation_ = build_constellation(self.order)
        if (self.n0 is None) == (self.ebn0_db is None):
            raise ValueError("set exactly one of n0 or ebn0_db")
        if self.n0 is not None:
            self.n0_ = check_n0(self.n0)
        else:
            self.n0_ = ebn0_to_n0(self.ebn0_db, self.constellation_.k)
        return self

    def transform(self, X, priors=None):
        """LLRs of shape ``(n, k)``."""
        check_is_fitted(self, "constellation_")
        return llr(check_received(X), self.constellation_, self.n0_, priors)

    decision_function = transform

    def predict(self, X, priors=None):
        """Hard bit decisions of shape ``(n, k)``."""
        return hard_decide(self.transform(X, priors))
