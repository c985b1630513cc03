"""
Block-distribution descriptors and index arithmetic.

All ranges are 0-based and half-open. For a 1-based loop such as
``for i = 1:25`` on the first of four processors, the equivalent range is
``BlockRange(start=0, len=25)``.
"""

from enum import Enum
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..exceptions import DistributionError


class DistDim(str, Enum):
    """The matrix dimension split across ranks."""

    ROWS = "rows"
    COLS = "cols"

    @property
    def other(self) -> "DistDim":
        return DistDim.COLS if self is DistDim.ROWS else DistDim.ROWS


class BlockRange(BaseModel):
    """Contiguous run of global indices owned by one rank."""

    model_config = ConfigDict(frozen=True)

    start: int = Field(ge=0)
    len: int = Field(ge=0)

    @property
    def stop(self) -> int:
        return self.start + self.len

    def as_slice(self) -> slice:
        return slice(self.start, self.stop)

    def contains(self, index: int) -> bool:
        return self.start <= index < self.stop

    def intersect(self, other: "BlockRange") -> "BlockRange":
        start = max(self.start, other.start)
        stop = min(self.stop, other.stop)
        return BlockRange(start=start, len=max(0, stop - start))


def block_partition(n: int, p: int) -> List[BlockRange]:
    """Split ``n`` items over ``p`` ranks; the first ``n % p`` ranks get one extra item."""

    if p < 1:
        raise DistributionError(f"rank count must be ≥ 1, got {p}")
    if n < 0:
        raise DistributionError(f"item count must be ≥ 0, got {n}")

    base, extra = divmod(n, p)
    ranges = []
    start = 0
    for position in range(p):
        length = base + 1 if position < extra else base
        ranges.append(BlockRange(start=start, len=length))
        start += length
    return ranges


class DistMap(BaseModel):
    """1-D processor grid over a list of ranks.

    ``DistMap.for_world(4)`` is the column-block map ``map([1 4], {}, [0:3])``.
    """

    model_config = ConfigDict(frozen=True)

    grid: Tuple[int, int]
    dist_dim: DistDim
    ranks: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_grid(self) -> "DistMap":
        rows, cols = self.grid
        if rows < 1 or cols < 1:
            raise ValueError(f"grid extents must be ≥ 1, got {self.grid}")
        if rows > 1 and cols > 1:
            raise ValueError(f"only 1-D processor grids are supported, got {self.grid}")
        if rows * cols != len(self.ranks):
            raise ValueError(f"grid {self.grid} does not match {len(self.ranks)} ranks")
        if len(set(self.ranks)) != len(self.ranks):
            raise ValueError(f"ranks must be distinct, got {list(self.ranks)}")
        if any(rank < 0 for rank in self.ranks):
            raise ValueError("ranks must be non-negative")
        if rows > 1 and self.dist_dim is not DistDim.ROWS:
            raise ValueError("a row grid distributes rows")
        if cols > 1 and self.dist_dim is not DistDim.COLS:
            raise ValueError("a column grid distributes columns")
        return self

    @classmethod
    def for_world(cls, world_size: int, dist_dim: DistDim = DistDim.COLS) -> "DistMap":
        if world_size < 1:
            raise DistributionError(f"world_size must be ≥ 1, got {world_size}")
        dist_dim = DistDim(dist_dim)
        grid = (1, world_size) if dist_dim is DistDim.COLS else (world_size, 1)
        return cls(grid=grid, dist_dim=dist_dim, ranks=tuple(range(world_size)))

    @property
    def size(self) -> int:
        return len(self.ranks)

    def flipped(self) -> "DistMap":
        rows, cols = self.grid
        return DistMap(grid=(cols, rows), dist_dim=self.dist_dim.other, ranks=self.ranks)

    def covers_world(self, world_size: int) -> bool:
        return sorted(self.ranks) == list(range(world_size))

    def position(self, rank: int) -> int:
        try:
            return self.ranks.index(rank)
        except ValueError:
            raise DistributionError(f"rank {rank} is not part of map ranks {list(self.ranks)}") from None

    def partition(self, n: int) -> List[BlockRange]:
        return block_partition(n, self.size)

    def local_range(self, n: int, rank: int) -> BlockRange:
        return local_range(self, n, rank)

    def owner_of(self, n: int, global_index: int) -> int:
        return owner_of(self, n, global_index)


def owner_of(dist_map: DistMap, n: int, global_index: int) -> int:
    """Rank whose block of an extent-``n`` dimension holds ``global_index``."""

    if not 0 <= global_index < n:
        raise DistributionError(f"index {global_index} outside [0, {n})")

    p = dist_map.size
    base, extra = divmod(n, p)
    # The first `extra` blocks have base + 1 items.
    wide = extra * (base + 1)
    if global_index < wide:
        position = global_index // (base + 1)
    else:
        position = extra + (global_index - wide) // base
    return dist_map.ranks[position]


def local_range(dist_map: DistMap, n: int, rank: int) -> BlockRange:
    return block_partition(n, dist_map.size)[dist_map.position(rank)]


def ranges_by_rank(dist_map: DistMap, n: int) -> List[Tuple[int, BlockRange]]:
    """(rank, range) pairs in map order."""

    return list(zip(dist_map.ranks, block_partition(n, dist_map.size)))


def active_neighbors(dist_map: DistMap, n: int, rank: int) -> Tuple[Optional[int], Optional[int]]:
    """Nearest ranks on either side that own a non-empty block, if any."""

    ranges = ranges_by_rank(dist_map, n)
    position = dist_map.position(rank)
    left = next((r for r, block in reversed(ranges[:position]) if block.len), None)
    right = next((r for r, block in ranges[position + 1:] if block.len), None)
    return left, right


def check_ranks(ranks: Sequence[int], world_size: int) -> None:
    bad = [rank for rank in ranks if not 0 <= rank < world_size]
    if bad:
        raise DistributionError(f"ranks {bad} outside [0, {world_size})")
