"""
Error hierarchy for pargrid.

Every error raised on purpose by the package derives from ``PargridError``
so callers (notably the CLI) can separate usage, verification and runtime
failures.
"""

from typing import List, Optional, Tuple


class PargridError(Exception):
    """Base class for all pargrid errors."""


# Transport


class TransportError(PargridError):
    """Message passing failure."""


class InvalidRankError(TransportError):
    """A destination, source or root rank is out of range or not allowed."""


class DeadlockSuspectedError(TransportError):
    """A blocking receive waited longer than the configured timeout."""

    def __init__(self, rank: int, source: int, tag: int, timeout_s: float):
        self.rank = rank
        self.source = source
        self.tag = tag
        self.timeout_s = timeout_s
        super().__init__(
            f"rank {rank}: no message from rank {source} with tag {tag} "
            f"after {timeout_s:g} s (deadlock suspected)"
        )


class FrameError(TransportError):
    """A frame header does not agree with its payload."""


class CollectiveError(TransportError):
    """Ranks supplied incompatible contributions to a collective."""

    def __init__(self, message: str, offending_rank: Optional[int] = None):
        self.offending_rank = offending_rank
        super().__init__(message)


# Launch


class LaunchError(PargridError):
    """Backend setup failed."""

    def __init__(self, message: str, rank: Optional[int] = None):
        self.rank = rank
        super().__init__(message if rank is None else f"rank {rank}: {message}")


class WorkerFailedError(LaunchError):
    """One or more workers raised; failures are listed in arrival order."""

    def __init__(self, failures: List[Tuple[int, str]]):
        self.failures = failures
        first_rank = failures[0][0] if failures else None
        summary = "; ".join(f"rank {rank}: {message.strip().splitlines()[-1]}" for rank, message in failures)
        PargridError.__init__(self, f"{len(failures)} worker(s) failed: {summary}")
        self.rank = first_rank


# Distribution


class DistributionError(PargridError):
    """Invalid map, partition or index arguments."""


class ShapeMismatchError(DistributionError):
    """A block does not match the rank's local shape or element kind."""


# Kernels


class KernelError(PargridError):
    """Kernel computation failure."""


class IndexOutOfRangeError(KernelError):
    """Work item index outside the job."""


class DivergenceError(KernelError):
    """Integrated state became non-finite."""

    def __init__(self, step: int, xe_point: float):
        self.step = step
        self.xe_point = xe_point
        super().__init__(f"non-finite state at step {step} (xe={xe_point!r})")


# Benchmarking


class BenchError(PargridError):
    """Timing or analysis failure."""


class DigestMismatchError(BenchError):
    """Records from different configurations were mixed in one analysis."""


class MissingBaselineError(BenchError):
    """Speedup analysis needs records at P=1."""


class AmdahlDomainError(BenchError):
    """Parallel fraction or worker count outside the law's domain."""


# CLI


class UsageError(PargridError):
    """Command-line usage problem."""
