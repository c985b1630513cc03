# Bench Package

from .analysis import amdahl_limit, amdahl_speedup, fit_parallel_fraction, speedup_table
from .report import emit_plot, read_report, write_report
from .timing import time_kernel

__all__ = [
    "amdahl_limit",
    "amdahl_speedup",
    "emit_plot",
    "fit_parallel_fraction",
    "read_report",
    "speedup_table",
    "time_kernel",
    "write_report",
]
