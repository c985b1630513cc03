"""
Kernel timing harness.
"""

import time
from typing import List, Optional, Union

import structlog

from ..config.settings import Settings
from ..exceptions import BenchError, PargridError
from ..kernels.registry import get_kernel
from ..models.configs import KernelConfig
from ..models.records import TimingRecord
from ..transport.context import WorkerCtx
from ..transport.launcher import launch
from ..utils.hardware_detector import HardwareDetector

logger = structlog.get_logger(__name__)


def _timed_kernel(ctx: WorkerCtx, kernel_id: str, config: KernelConfig) -> float:
    # Barriers bracket the body so every rank's work is inside the interval.
    kernel = get_kernel(kernel_id)
    ctx.barrier()
    started = time.perf_counter()
    kernel.parallel(ctx, config)
    ctx.barrier()
    return time.perf_counter() - started


def time_kernel(
    kernel_id: str,
    config: Union[KernelConfig, dict],
    workers: int,
    trials: int = 3,
    backend: Optional[str] = None,
    timeout_s: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> List[TimingRecord]:
    """Run a kernel ``trials`` times at ``workers`` ranks; time the kernel body only."""

    kernel = get_kernel(kernel_id)
    if workers < 1:
        raise BenchError(f"workers must be ≥ 1, got {workers}")
    if trials < 1:
        raise BenchError(f"trials must be ≥ 1, got {trials}")
    if not isinstance(config, kernel.config_model):
        config = kernel.config_model.model_validate(config)

    digest = config.digest(kernel_id)
    logger.info(
        "timing kernel",
        kernel=kernel_id,
        workers=workers,
        trials=trials,
        digest=digest,
        physical_cores=HardwareDetector.physical_cores(),
    )

    records = []
    for trial in range(trials):
        try:
            elapsed = launch(
                workers, _timed_kernel, kernel_id, config, backend=backend, timeout_s=timeout_s, settings=settings
            )[0]
        except PargridError as e:
            raise BenchError(f"{kernel_id} trial {trial} at {workers} workers failed: {e}") from e

        records.append(
            TimingRecord(
                kernel_id=kernel_id,
                workers=workers,
                trial=trial,
                wall_time_s=max(elapsed, 1e-9),
                config_digest=digest,
            )
        )
        logger.debug("trial finished", kernel=kernel_id, workers=workers, trial=trial, wall_time_s=elapsed)
    return records
