# CLI Package

from .main import cli, main, parse_args
from .runner import load_kernel_config, run, verify_kernel

__all__ = ["cli", "load_kernel_config", "main", "parse_args", "run", "verify_kernel"]
