"""
Hardware Detection Utilities

Reports the CPU and memory resources that bound achievable speedup on the
local machine.
"""

import os
import platform
from typing import Any, Dict, Optional

import structlog

try:
    import psutil
    PSUTIL_AVAILABLE = True
except ImportError:
    PSUTIL_AVAILABLE = False

logger = structlog.get_logger(__name__)


class HardwareDetector:
    """Detects and reports system hardware capabilities."""

    @staticmethod
    def detect_system_info() -> Dict[str, Any]:
        """Detect platform, CPU and memory information."""

        info = {
            "platform": platform.system(),
            "architecture": platform.machine(),
            "processor": platform.processor(),
            "python_version": platform.python_version(),
        }
        info.update(HardwareDetector.detect_cpu())
        info.update(HardwareDetector.detect_memory())
        return info

    @staticmethod
    def detect_cpu() -> Dict[str, Any]:
        """Detect logical and physical core counts."""

        cpu_info = {
            "cpu_count": os.cpu_count(),
            "cpu_count_physical": None,
            "cpu_freq_mhz": None,
        }

        if PSUTIL_AVAILABLE:
            try:
                freq = psutil.cpu_freq()
                cpu_info.update({
                    "cpu_count_physical": psutil.cpu_count(logical=False),
                    "cpu_freq_mhz": freq.current if freq else None,
                })
            except Exception as e:
                logger.warning("failed to get detailed CPU info", error=str(e))

        return cpu_info

    @staticmethod
    def detect_memory() -> Dict[str, Any]:
        """Detect total and available memory in bytes."""

        memory_info = {"memory_total": None, "memory_available": None}

        if PSUTIL_AVAILABLE:
            try:
                virtual_memory = psutil.virtual_memory()
                memory_info.update({
                    "memory_total": virtual_memory.total,
                    "memory_available": virtual_memory.available,
                })
            except Exception as e:
                logger.warning("failed to get memory info", error=str(e))
        elif platform.system() == "Linux":
            try:
                with open("/proc/meminfo", "r") as f:
                    for line in f:
                        if line.startswith("MemTotal:"):
                            memory_info["memory_total"] = int(line.split()[1]) * 1024
                        elif line.startswith("MemAvailable:"):
                            memory_info["memory_available"] = int(line.split()[1]) * 1024
            except OSError as e:
                logger.warning("failed to read /proc/meminfo", error=str(e))

        return memory_info

    @staticmethod
    def physical_cores() -> Optional[int]:
        """Physical core count, falling back to logical cores when unknown."""

        cpu = HardwareDetector.detect_cpu()
        return cpu["cpu_count_physical"] or cpu["cpu_count"]

    @staticmethod
    def recommended_max_workers() -> int:
        """Largest worker count that does not oversubscribe physical cores."""

        return max(1, HardwareDetector.physical_cores() or 1)
