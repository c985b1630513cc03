# Distribution Package

from .darray import DArray, agg, dscatter, dzeros, local_part, put_local, transpose_grid
from .dist_map import BlockRange, DistDim, DistMap, block_partition, local_range, owner_of

__all__ = [
    "BlockRange",
    "DArray",
    "DistDim",
    "DistMap",
    "agg",
    "block_partition",
    "dscatter",
    "dzeros",
    "local_part",
    "local_range",
    "owner_of",
    "put_local",
    "transpose_grid",
]
