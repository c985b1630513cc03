# Kernels Package

from .batch import batch_work, run_batch_parallel, run_batch_serial
from .registry import KERNELS, KernelSpec, get_kernel
from .sar import direct_inverse_dft2, form_image_parallel, form_image_serial, make_phase_history
from .sqif import (
    SliceVoltage,
    series_sqif,
    sqif_rhs,
    sqif_sweep_dp,
    sqif_sweep_serial,
    sqif_sweep_tp,
)

__all__ = [
    "KERNELS",
    "KernelSpec",
    "SliceVoltage",
    "batch_work",
    "direct_inverse_dft2",
    "form_image_parallel",
    "form_image_serial",
    "get_kernel",
    "make_phase_history",
    "run_batch_parallel",
    "run_batch_serial",
    "series_sqif",
    "sqif_rhs",
    "sqif_sweep_dp",
    "sqif_sweep_serial",
    "sqif_sweep_tp",
]
