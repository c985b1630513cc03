"""
pargrid - SPMD distributed-array runtime and parallel benchmark suite.

Message passing among P workers, block-distributed dense matrices with
local / put_local / agg / transpose_grid, three reference kernels with
serial oracles, and a speedup / Amdahl analysis harness.
"""

__version__ = "1.0.0"
