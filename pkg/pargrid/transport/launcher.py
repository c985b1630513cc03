"""
SPMD launch: start ``world_size`` worker processes running the same program.

The program is called as ``program(ctx, *args)`` on every rank. Under the
``spawn`` and ``forkserver`` start methods the program, its arguments and
its return value must be picklable (module-level functions).
"""

import logging
import multiprocessing
import queue
import time
import traceback
from typing import Any, Callable, Dict, List, Optional, Tuple

import structlog

from ..config.settings import Settings, get_settings
from ..exceptions import LaunchError, WorkerFailedError
from ..logging_config import configure_logging
from .backends import create_backend
from .context import WorkerCtx

logger = structlog.get_logger(__name__)

POLL_INTERVAL_S = 0.25
JOIN_TIMEOUT_S = 5.0


def _worker_main(
    rank: int,
    world_size: int,
    endpoint_args: Tuple[type, tuple],
    timeout_s: float,
    log_level: str,
    program: Callable[..., Any],
    args: tuple,
    results,
) -> None:
    if not logging.getLogger().handlers:
        configure_logging(log_level)

    endpoint_cls, endpoint_init = endpoint_args
    endpoint = None
    try:
        endpoint = endpoint_cls(*endpoint_init)
        ctx = WorkerCtx(rank, world_size, endpoint, timeout_s=timeout_s)
        value = program(ctx, *args)
        results.put((rank, True, value))
    except BaseException:
        results.put((rank, False, traceback.format_exc()))
    finally:
        if endpoint is not None:
            endpoint.close()


def _collect(processes, results, world_size: int, grace_period_s: float):
    """Wait for every rank to report; stop early once a failure's grace period ends."""

    values: Dict[int, Any] = {}
    failures: List[Tuple[int, str]] = []
    reported = set()
    silent_exits: Dict[int, int] = {}
    first_failure_at: Optional[float] = None

    while len(reported) < world_size:
        if first_failure_at is not None and time.monotonic() - first_failure_at > grace_period_s:
            break
        try:
            rank, ok, payload = results.get(timeout=POLL_INTERVAL_S)
        except queue.Empty:
            for rank, process in enumerate(processes):
                if rank in reported or process.is_alive():
                    continue
                # A clean exit may still have its report in flight; give it one more poll.
                silent_exits[rank] = silent_exits.get(rank, 0) + 1
                if process.exitcode != 0 or silent_exits[rank] > 1:
                    reported.add(rank)
                    failures.append((rank, f"worker exited with code {process.exitcode} without reporting"))
                    first_failure_at = first_failure_at or time.monotonic()
            continue

        reported.add(rank)
        if ok:
            values[rank] = payload
        else:
            logger.error("worker failed", rank=rank, error=payload.strip().splitlines()[-1])
            failures.append((rank, payload))
            first_failure_at = first_failure_at or time.monotonic()

    return values, failures


def launch(
    world_size: int,
    program: Callable[..., Any],
    *args: Any,
    backend: Optional[str] = None,
    timeout_s: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> List[Any]:
    """Run ``program`` on ``world_size`` workers and return per-rank results in rank order.

    Raises ``WorkerFailedError`` if any worker raised, and ``LaunchError``
    if the backend or a worker process could not be set up.
    """

    if world_size < 1:
        raise LaunchError("world_size must be ≥ 1")

    settings = settings or get_settings()
    backend_name = backend or settings.backend
    timeout_s = settings.timeout_s if timeout_s is None else timeout_s

    mp_context = multiprocessing.get_context(settings.start_method)
    fabric = create_backend(backend_name, world_size, mp_context, host=settings.socket_host)
    results = mp_context.Queue()
    processes = []

    logger.info("launching workers", world_size=world_size, backend=backend_name, timeout_s=timeout_s)
    try:
        for rank in range(world_size):
            process = mp_context.Process(
                target=_worker_main,
                args=(
                    rank,
                    world_size,
                    fabric.endpoint_args(rank),
                    timeout_s,
                    settings.log_level,
                    program,
                    args,
                    results,
                ),
                name=f"pargrid-worker-{rank}",
                daemon=True,
            )
            try:
                process.start()
            except Exception as e:
                raise LaunchError(f"cannot start worker process: {e}", rank=rank) from e
            processes.append(process)
        fabric.after_start()

        values, failures = _collect(processes, results, world_size, settings.grace_period_s)
    finally:
        for process in processes:
            if process.is_alive() and len(processes) < world_size:
                process.terminate()
        fabric.close()

    if failures:
        for process in processes:
            if process.is_alive():
                process.terminate()
    for process in processes:
        process.join(JOIN_TIMEOUT_S)
        if process.is_alive():
            process.terminate()
            process.join(JOIN_TIMEOUT_S)

    results.cancel_join_thread()
    results.close()

    if failures:
        raise WorkerFailedError(failures)

    logger.info("workers finished", world_size=world_size, backend=backend_name)
    return [values[rank] for rank in range(world_size)]
