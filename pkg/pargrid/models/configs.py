"""
Kernel configuration records.
"""

import hashlib
import math
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class KernelConfig(BaseModel):
    """Base for kernel configs: immutable, with a stable content digest."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(default=42, ge=0, lt=1 << 64)

    def digest(self, kernel_id: str = "") -> str:
        """Short content hash used to keep timing comparisons within one config."""

        payload = f"{kernel_id}|{type(self).__name__}|{self.model_dump_json()}"
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class BatchJob(KernelConfig):
    """Independent work items; ``n_items`` plays the role of the file count."""

    n_items: int = Field(default=63, ge=0)
    work_cost: int = Field(default=1000, ge=1)


class SarConfig(KernelConfig):
    """Extents of the complex phase-history matrix F (nx rows, m columns)."""

    n_rows: int = Field(default=128, ge=1)
    n_cols: int = Field(default=192, ge=1)


class SqifParams(KernelConfig):
    """Parameters of one flux sweep over a chain of coupled units.

    J: bias, xe: external-flux sample points, M: nearest-neighbour coupling,
    dt: integration step, beta_n: damping, Nsquid: unit count,
    var_size: amplitude of the per-unit parameter spread, tmax: horizon.
    """

    J: float = 1.2
    xe: List[float] = Field(default_factory=lambda: np.linspace(-1.0, 1.0, 32).tolist(), min_length=1)
    M: float = 0.5
    dt: float = Field(default=0.01, gt=0)
    beta_n: float = 1.0
    Nsquid: int = Field(default=64, ge=1)
    var_size: float = Field(default=0.1, ge=0)
    tmax: float = 20.0

    @field_validator("xe")
    @classmethod
    def _finite_flux(cls, value: List[float]) -> List[float]:
        if not all(math.isfinite(x) for x in value):
            raise ValueError("xe points must be finite")
        return value

    @model_validator(mode="after")
    def _check_horizon(self) -> "SqifParams":
        if self.tmax < self.dt:
            raise ValueError(f"tmax ({self.tmax}) must be ≥ dt ({self.dt})")
        return self

    @property
    def n_steps(self) -> int:
        """Fixed-step count ceil(tmax / dt), robust to representation error."""

        ratio = self.tmax / self.dt
        nearest = round(ratio)
        return max(1, nearest if math.isclose(ratio, nearest, rel_tol=1e-12) else math.ceil(ratio))

    @classmethod
    def from_range(cls, xe_min: float, xe_max: float, xe_points: int, **values) -> "SqifParams":
        """Evenly spaced flux grid, as in a ``linspace(xe_min, xe_max, n)`` sweep."""

        if xe_points < 1:
            raise ValueError("xe_points must be ≥ 1")
        return cls(xe=np.linspace(xe_min, xe_max, xe_points).tolist(), **values)


class TransferCurve(BaseModel):
    """Mean voltage per external-flux point."""

    xe: List[float]
    v: List[float]

    @model_validator(mode="after")
    def _check_curve(self) -> "TransferCurve":
        if len(self.xe) != len(self.v):
            raise ValueError(f"{len(self.xe)} flux points but {len(self.v)} voltages")
        if not all(math.isfinite(x) for x in self.v):
            raise ValueError("voltages must be finite")
        return self
