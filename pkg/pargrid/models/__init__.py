# Models Package

from .configs import BatchJob, KernelConfig, SarConfig, SqifParams, TransferCurve
from .records import SpeedupRow, TimingRecord
from .run_spec import RunSpec

__all__ = [
    "BatchJob",
    "KernelConfig",
    "RunSpec",
    "SarConfig",
    "SpeedupRow",
    "SqifParams",
    "TimingRecord",
    "TransferCurve",
]
