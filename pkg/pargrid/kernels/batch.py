"""
Task-parallel batch kernel.

Each work item is independent (the data-independence that made the
per-file processing embarrassingly parallel). Items are identified by
index; their "processing" is a deterministic integer hash iterated
``work_cost`` times, so runtime scales linearly with the cost.
"""

from typing import List, Optional

import structlog

from ..distribution.dist_map import block_partition
from ..exceptions import IndexOutOfRangeError
from ..models.configs import BatchJob
from ..transport.context import WorkerCtx

logger = structlog.get_logger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
TO_UNIT = 2.0 ** -53


def mix64(value: int) -> int:
    """One splitmix64 step."""

    z = (value + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def unit_interval(value: int) -> float:
    """Top 53 bits of a 64-bit word as a float in [0, 1)."""

    return (value >> 11) * TO_UNIT


def batch_work(item_index: int, job: BatchJob) -> float:
    if not 0 <= item_index < job.n_items:
        raise IndexOutOfRangeError(f"item {item_index} outside [0, {job.n_items})")

    state = (job.seed ^ mix64(item_index)) & MASK64
    for _ in range(job.work_cost):
        state = mix64(state)
    return unit_interval(state)


def run_batch_serial(job: BatchJob) -> List[float]:
    return [batch_work(index, job) for index in range(job.n_items)]


def run_batch_parallel(ctx: WorkerCtx, job: BatchJob) -> Optional[List[float]]:
    """Each rank processes its contiguous slice; rank 0 returns all checksums in index order."""

    mine = block_partition(job.n_items, ctx.world_size)[ctx.rank]
    logger.debug("batch slice", rank=ctx.rank, start=mine.start, count=mine.len)

    checksums = [batch_work(index, job) for index in range(mine.start, mine.stop)]
    gathered = ctx.gather(0, checksums)
    return None if gathered is None else gathered.values.tolist()
