"""
Speedup, efficiency and Amdahl's-law bounds.

Fractions are read as the decimal the caller wrote (0.9 is exactly nine
tenths), so ``amdahl_limit(0.9)`` is exactly 10.
"""

from fractions import Fraction
from typing import Iterable, List, Optional

import pandas as pd

from ..exceptions import AmdahlDomainError, DigestMismatchError, MissingBaselineError
from ..models.records import SpeedupRow, TimingRecord


def _exact(value: float) -> Fraction:
    return Fraction(repr(float(value)))


def amdahl_limit(f: float) -> float:
    """Speedup bound 1 / (1 - f) for parallel fraction f as P grows without limit."""

    if f < 0:
        raise AmdahlDomainError(f"parallel fraction must be ≥ 0, got {f}")
    if f >= 1:
        raise AmdahlDomainError(f"parallel fraction {f} ≥ 1 has no finite speedup limit")
    return float(1 / (1 - _exact(f)))


def amdahl_speedup(f: float, workers: float) -> float:
    """Speedup 1 / ((1 - f) + f / P) at P workers."""

    if not 0 <= f <= 1:
        raise AmdahlDomainError(f"parallel fraction must lie in [0, 1], got {f}")
    if workers < 1:
        raise AmdahlDomainError(f"worker count must be ≥ 1, got {workers}")
    fraction = _exact(f)
    return float(1 / ((1 - fraction) + fraction / _exact(workers)))


def fit_parallel_fraction(speedup: float, workers: int) -> float:
    """Parallel fraction that would explain a measured speedup at P workers.

    Inverts the finite-P law: f = (1 - 1/S) / (1 - 1/P). Values above 1
    indicate superlinear speedup, below 0 a slowdown.
    """

    if workers <= 1:
        raise AmdahlDomainError("a parallel fraction cannot be fitted at a single worker")
    if speedup <= 0:
        raise AmdahlDomainError(f"speedup must be positive, got {speedup}")
    return (1.0 - 1.0 / speedup) / (1.0 - 1.0 / workers)


def speedup_table(records: Iterable[TimingRecord], declared_fraction: Optional[float] = None) -> List[SpeedupRow]:
    """Per-P mean times and speedup relative to the P=1 mean.

    ``amdahl_bound`` is ``amdahl_speedup(declared_fraction, P)``, or the
    ideal bound P when no fraction is declared.
    """

    records = list(records)
    if not records:
        raise MissingBaselineError("no timing records")

    digests = sorted({record.config_digest for record in records})
    if len(digests) > 1:
        raise DigestMismatchError(f"records from {len(digests)} different configs: {', '.join(digests)}")

    frame = pd.DataFrame([record.model_dump() for record in records])
    means = frame.groupby("workers")["wall_time_s"].mean().sort_index()
    if 1 not in means.index:
        raise MissingBaselineError("speedup needs records at workers=1")

    kernel_id = records[0].kernel_id
    baseline = float(means.loc[1])
    rows = []
    for workers, mean_time in means.items():
        workers = int(workers)
        speedup = 1.0 if workers == 1 else baseline / float(mean_time)
        bound = float(workers) if declared_fraction is None else amdahl_speedup(declared_fraction, workers)
        rows.append(
            SpeedupRow(
                kernel_id=kernel_id,
                workers=workers,
                mean_time_s=float(mean_time),
                speedup=speedup,
                efficiency=speedup / workers,
                amdahl_bound=bound,
            )
        )
    return rows
