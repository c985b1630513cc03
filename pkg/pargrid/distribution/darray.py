"""
Distributed dense matrices.

A ``DArray`` holds this rank's block of a global (n_rows, n_cols) matrix
under a 1-D ``DistMap``: all rows of a column range when columns are
distributed, all columns of a row range when rows are. Operations mirror
the familiar global-array verbs::

    pF = zeros(nx, m, pFmap)      -> dzeros(ctx, (nx, m), kind, pfmap)
    pFlocal = local(pF)           -> local_part(pF)
    pF = put_local(pF, pFlocal)   -> put_local(pF, block)
    Z = transpose_grid(pF)        -> transpose_grid(ctx, pF)
    F = agg(pF)                   -> agg(ctx, pF)

Collective plumbing uses tags from the array's own reserved block, so
exchanges on different arrays never match each other's messages.
"""

from typing import Optional, Tuple, Union

import numpy as np
import structlog

from ..exceptions import DistributionError, ShapeMismatchError
from ..transport.codec import ElemKind
from ..transport.context import DARRAY_TAG_BASE, DARRAY_TAG_STRIDE, WorkerCtx
from .dist_map import BlockRange, DistDim, DistMap, check_ranks, local_range, ranges_by_rank

logger = structlog.get_logger(__name__)

AGG_OFFSET = 0
TRANSPOSE_HEADER_OFFSET = 1
TRANSPOSE_TILE_OFFSET = 2
SCATTER_OFFSET = 3

_KIND_NAMES = {"f64": ElemKind.F64, "complex-f64": ElemKind.C128, "c128": ElemKind.C128}
_DTYPES = {ElemKind.F64: np.dtype(np.float64), ElemKind.C128: np.dtype(np.complex128)}
_KIND_LABELS = {ElemKind.F64: "f64", ElemKind.C128: "complex-f64"}


def as_elem_kind(kind: Union[ElemKind, str]) -> ElemKind:
    if isinstance(kind, ElemKind):
        resolved = kind
    elif isinstance(kind, str) and kind.lower() in _KIND_NAMES:
        resolved = _KIND_NAMES[kind.lower()]
    else:
        raise DistributionError(f"unknown element kind {kind!r} (expected 'f64' or 'complex-f64')")
    if resolved not in _DTYPES:
        raise DistributionError("distributed arrays hold f64 or complex-f64 elements")
    return resolved


def local_shape_for(global_shape: Tuple[int, int], dist_map: DistMap, rank: int) -> Tuple[int, int]:
    n_rows, n_cols = global_shape
    if dist_map.dist_dim is DistDim.COLS:
        return n_rows, local_range(dist_map, n_cols, rank).len
    return local_range(dist_map, n_rows, rank).len, n_cols


class DArray:
    """This rank's view of a block-distributed matrix."""

    def __init__(
        self,
        ctx: WorkerCtx,
        global_shape: Tuple[int, int],
        elem_kind: ElemKind,
        dist_map: DistMap,
        local_block: np.ndarray,
        array_id: int,
    ):
        self.ctx = ctx
        self.global_shape = (int(global_shape[0]), int(global_shape[1]))
        self.elem_kind = elem_kind
        self.map = dist_map
        self.array_id = array_id
        self._block = local_block

    def __repr__(self) -> str:
        return (
            f"DArray(id={self.array_id}, shape={self.global_shape}, kind={self.elem_kind.name}, "
            f"dist={self.map.dist_dim.value}, rank={self.ctx.rank}, local={self._block.shape})"
        )

    @property
    def dtype(self) -> np.dtype:
        return _DTYPES[self.elem_kind]

    @property
    def dist_dim(self) -> DistDim:
        return self.map.dist_dim

    @property
    def dist_extent(self) -> int:
        return self.global_shape[1] if self.dist_dim is DistDim.COLS else self.global_shape[0]

    @property
    def local_range(self) -> BlockRange:
        return local_range(self.map, self.dist_extent, self.ctx.rank)

    @property
    def local_shape(self) -> Tuple[int, int]:
        return local_shape_for(self.global_shape, self.map, self.ctx.rank)

    def tag(self, offset: int) -> int:
        return DARRAY_TAG_BASE + self.array_id * DARRAY_TAG_STRIDE + offset


def _check_map(ctx: WorkerCtx, dist_map: DistMap) -> None:
    check_ranks(dist_map.ranks, ctx.world_size)
    if not dist_map.covers_world(ctx.world_size):
        raise DistributionError(
            f"map ranks {list(dist_map.ranks)} do not cover the {ctx.world_size} ranks of this launch"
        )


def _check_shape(shape: Tuple[int, int]) -> Tuple[int, int]:
    if len(shape) != 2 or shape[0] < 0 or shape[1] < 0:
        raise DistributionError(f"shape must be two non-negative extents, got {shape}")
    return int(shape[0]), int(shape[1])


def dzeros(
    ctx: WorkerCtx,
    shape: Tuple[int, int],
    elem_kind: Union[ElemKind, str] = ElemKind.F64,
    dist_map: Optional[DistMap] = None,
) -> DArray:
    """Zero-filled distributed matrix; defaults to a column map over all ranks."""

    shape = _check_shape(shape)
    kind = as_elem_kind(elem_kind)
    dist_map = dist_map or DistMap.for_world(ctx.world_size)
    _check_map(ctx, dist_map)

    block = np.zeros(local_shape_for(shape, dist_map, ctx.rank), dtype=_DTYPES[kind])
    return DArray(ctx, shape, kind, dist_map, block, ctx.next_array_id())


def local_part(array: DArray) -> np.ndarray:
    """Copy of this rank's block."""

    return array._block.copy()


def put_local(array: DArray, block) -> DArray:
    """Replace this rank's block in place. No communication."""

    block = np.asarray(block)
    if block.shape != array.local_shape:
        raise ShapeMismatchError(
            f"rank {array.ctx.rank}: block shape {block.shape} does not match local shape {array.local_shape}"
        )
    if block.dtype.kind not in "biufc":
        raise ShapeMismatchError(f"rank {array.ctx.rank}: unsupported block dtype {block.dtype}")
    if np.iscomplexobj(block) != (array.elem_kind is ElemKind.C128):
        raise ShapeMismatchError(
            f"rank {array.ctx.rank}: {block.dtype} block written to a {_KIND_LABELS[array.elem_kind]} array"
        )

    array._block = np.array(block, dtype=array.dtype)
    return array


def _place(full: np.ndarray, dist_dim: DistDim, block_range: BlockRange, block: np.ndarray) -> None:
    if dist_dim is DistDim.COLS:
        full[:, block_range.as_slice()] = block
    else:
        full[block_range.as_slice(), :] = block


def agg(ctx: WorkerCtx, array: DArray) -> Optional[np.ndarray]:
    """Stitch the global matrix on rank 0; ``None`` on every other rank."""

    root = 0
    tag = array.tag(AGG_OFFSET)
    if ctx.rank != root:
        ctx.post_reserved(root, tag, array._block)
        return None

    full = np.empty(array.global_shape, dtype=array.dtype)
    for rank, block_range in ranges_by_rank(array.map, array.dist_extent):
        if rank == root:
            block = array._block
        else:
            block = ctx.recv(rank, tag)
            expected = local_shape_for(array.global_shape, array.map, rank)
            if block.shape != expected:
                raise ShapeMismatchError(f"agg: rank {rank} sent block {block.shape}, expected {expected}")
        _place(full, array.dist_dim, block_range, block)
    return full


def dscatter(
    ctx: WorkerCtx,
    shape: Tuple[int, int],
    elem_kind: Union[ElemKind, str] = ElemKind.F64,
    dist_map: Optional[DistMap] = None,
    matrix: Optional[np.ndarray] = None,
    root: int = 0,
) -> DArray:
    """Distribute ``matrix`` (held by ``root`` only) into a new DArray."""

    result = dzeros(ctx, shape, elem_kind, dist_map)
    tag = result.tag(SCATTER_OFFSET)

    if ctx.rank == root:
        if matrix is None:
            raise DistributionError(f"dscatter: root {root} must supply the matrix")
        matrix = np.asarray(matrix)
        if matrix.shape != result.global_shape:
            raise ShapeMismatchError(f"dscatter: matrix shape {matrix.shape} differs from {result.global_shape}")
        for rank, block_range in ranges_by_rank(result.map, result.dist_extent):
            if result.dist_dim is DistDim.COLS:
                block = matrix[:, block_range.as_slice()]
            else:
                block = matrix[block_range.as_slice(), :]
            if rank == root:
                put_local(result, block)
            else:
                ctx.post_reserved(rank, tag, np.asarray(block, dtype=result.dtype))
    else:
        put_local(result, ctx.recv(root, tag))
    return result


def transpose_grid(ctx: WorkerCtx, array: DArray) -> DArray:
    """All-to-all redistribution flipping the distributed dimension.

    Element values do not move within the global matrix; only ownership
    changes. Rank i sends to rank j the intersection of its block with
    j's block under the flipped map.
    """

    source_map = array.map
    target_map = source_map.flipped()
    n_rows, n_cols = array.global_shape
    direction = b"c2r" if array.dist_dim is DistDim.COLS else b"r2c"
    header_tag = array.tag(TRANSPOSE_HEADER_OFFSET)
    tile_tag = array.tag(TRANSPOSE_TILE_OFFSET)

    # Old distributed extent / new distributed extent.
    old_extent, new_extent = (n_cols, n_rows) if array.dist_dim is DistDim.COLS else (n_rows, n_cols)
    old_ranges = dict(ranges_by_rank(source_map, old_extent))
    new_ranges = dict(ranges_by_rank(target_map, new_extent))
    peers = [rank for rank in source_map.ranks if rank != ctx.rank]

    def tile_for(dest: int) -> np.ndarray:
        rows_or_cols = new_ranges[dest].as_slice()
        if array.dist_dim is DistDim.COLS:
            return array._block[rows_or_cols, :]
        return array._block[:, rows_or_cols]

    for dest in peers:
        ctx.post_reserved(dest, header_tag, direction)
    for dest in peers:
        ctx.post_reserved(dest, tile_tag, np.ascontiguousarray(tile_for(dest)))

    for source in peers:
        peer_direction = ctx.recv(source, header_tag)
        if peer_direction != direction:
            raise DistributionError(
                f"transpose_grid: rank {ctx.rank} redistributes {direction.decode()} "
                f"but rank {source} redistributes {peer_direction.decode()}"
            )

    result_block_shape = local_shape_for(array.global_shape, target_map, ctx.rank)
    block = np.empty(result_block_shape, dtype=array.dtype)
    for source, source_range in old_ranges.items():
        tile = tile_for(ctx.rank) if source == ctx.rank else ctx.recv(source, tile_tag)
        if array.dist_dim is DistDim.COLS:
            # New rows-distributed block: my row range, tile covers the source's columns.
            block[:, source_range.as_slice()] = tile
        else:
            block[source_range.as_slice(), :] = tile

    logger.debug("transpose_grid", rank=ctx.rank, array_id=array.array_id, direction=direction.decode())
    return DArray(ctx, array.global_shape, array.elem_kind, target_map, block, ctx.next_array_id())
