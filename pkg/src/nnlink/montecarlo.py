"""Seeded, batch-parallel error counting shared by every evaluator.

Batch ``j`` of sweep point ``i`` always draws from ``make_rng(seed, i, j)``,
so two systems evaluated with the same seed see identical bits and noise,
and the worker count never changes the result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .channel import make_rng

DEFAULT_BATCH = 1 << 16

CSV_COLUMNS = ("system", "variant", "M", "train_snr_db", "ebn0_db", "metric",
               "value", "errors", "trials", "seed")


@dataclass(frozen=True)
class SweepRecord:
    """One measured (or closed-form) error rate at one Eb/N0 point."""

    system: str
    M: int
    ebn0_db: float
    metric: str
    value: float
    errors: int | None
    trials: int | None
    seed: int | None
    variant: str = ""
    train_snr_db: float | None = None

    def __post_init__(self):
        if self.metric not in ("ber", "ser"):
            raise ValueError(f"metric must be 'ber' or 'ser', got {self.metric!r}")
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"error rate {self.value} outside [0, 1]")
        if self.trials is not None and self.errors / self.trials != self.value:
            raise ValueError("value must equal errors / trials")

    @classmethod
    def measured(cls, system, M, ebn0_db, metric, errors, trials, seed, **kw):
        return cls(system, int(M), float(ebn0_db), metric, errors / trials,
                   int(errors), int(trials), seed, **kw)

    def as_row(self) -> dict:
        return {name: getattr(self, name) for name in CSV_COLUMNS}

    def to_dict(self) -> dict:
        return asdict(self)


def split_trials(trials: int, batch: int = DEFAULT_BATCH) -> list[int]:
    full, rest = divmod(int(trials), int(batch))
    return [batch] * full + ([rest] if rest else [])


def count_errors(count_fn, trials, seed, point_index, batch=DEFAULT_BATCH, workers=1):
    """Total errors over ``trials`` units for one sweep point.

    ``count_fn(rng, n)`` simulates ``n`` units and returns the error count,
    or a fixed-length vector of counts when several tallies share one draw.
    Batches are reduced in index order.
    """
    sizes = split_trials(trials, batch)

    def run(job):
        j, n = job
        out = count_fn(make_rng(seed, point_index, j), n)
        return int(out) if np.ndim(out) == 0 else np.asarray(out, dtype=np.int64)

    jobs = list(enumerate(sizes))
    if workers <= 1:
        counts = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, jobs))
    total = 0
    for c in counts:
        total += c
    return total


__all__ = ["CSV_COLUMNS", "DEFAULT_BATCH", "SweepRecord", "count_errors", "split_trials"]
