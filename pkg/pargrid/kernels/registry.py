"""
Kernel registry: how each kernel id maps to its config, parallel program
and serial oracle.
"""

from typing import Any, Callable, Dict, NamedTuple, Type

from ..exceptions import UsageError
from ..models.configs import BatchJob, KernelConfig, SarConfig, SqifParams
from .batch import run_batch_parallel, run_batch_serial
from .sar import form_image_parallel, form_image_serial, make_phase_history
from .sqif import sqif_sweep_dp, sqif_sweep_serial, sqif_sweep_tp


def sar_serial(cfg: SarConfig):
    return form_image_serial(make_phase_history(cfg), cfg)


class KernelSpec(NamedTuple):
    kernel_id: str
    config_model: Type[KernelConfig]
    parallel: Callable[..., Any]
    serial: Callable[[Any], Any]
    tolerance: float  # 0.0 means bit-exact


KERNELS: Dict[str, KernelSpec] = {
    "batch": KernelSpec("batch", BatchJob, run_batch_parallel, run_batch_serial, 0.0),
    "sar": KernelSpec("sar", SarConfig, form_image_parallel, sar_serial, 1e-10),
    "sqif-tp": KernelSpec("sqif-tp", SqifParams, sqif_sweep_tp, sqif_sweep_serial, 1e-12),
    "sqif-dp": KernelSpec("sqif-dp", SqifParams, sqif_sweep_dp, sqif_sweep_serial, 1e-12),
}


def get_kernel(kernel_id: str) -> KernelSpec:
    try:
        return KERNELS[kernel_id]
    except KeyError:
        raise UsageError(f"unknown kernel {kernel_id!r}; choose one of {', '.join(KERNELS)}") from None
