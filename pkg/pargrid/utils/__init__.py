from .hardware_detector import HardwareDetector

__all__ = ["HardwareDetector"]
