"""
Benchmark records.
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

KernelId = Literal["batch", "sar", "sqif-tp", "sqif-dp"]


class TimingRecord(BaseModel):
    """Wall time of one kernel run at one worker count."""

    model_config = ConfigDict(frozen=True)

    kernel_id: KernelId
    workers: int = Field(ge=1)
    trial: int = Field(ge=0)
    wall_time_s: float = Field(gt=0)
    config_digest: str


class SpeedupRow(BaseModel):
    """Mean time and derived speedup figures at one worker count."""

    model_config = ConfigDict(frozen=True)

    kernel_id: KernelId
    workers: int = Field(ge=1)
    mean_time_s: float
    speedup: float
    efficiency: float
    amdahl_bound: float
